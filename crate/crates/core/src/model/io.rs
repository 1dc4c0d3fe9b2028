//! JSON persistence for instances.

use serde_json::Value;

use super::instance::Instance;
use crate::error::{Error, Result};
use crate::numfmt::to_json_with_digits;
use crate::rng::PRNG_ID;

/// Serializes an instance with 17 significant digits per float and the PRNG identifier.
pub fn instance_to_json(instance: &Instance) -> Result<String> {
    let mut value = serde_json::to_value(instance)?;
    if let Value::Object(map) = &mut value {
        map.insert("prng_id".into(), Value::String(PRNG_ID.into()));
    }
    Ok(to_json_with_digits(&value, 17)?)
}

pub fn instance_from_json(text: &str) -> Result<Instance> {
    let mut value: Value = serde_json::from_str(text)?;
    if let Value::Object(map) = &mut value {
        if let Some(id) = map.remove("prng_id") {
            if id.as_str() != Some(PRNG_ID) {
                log::warn!("instance was generated with a different PRNG: {id}");
            }
        }
    }
    let instance: Instance = serde_json::from_value(value)?;
    validate(&instance)?;
    Ok(instance)
}

fn validate(instance: &Instance) -> Result<()> {
    let rebuilt: Instance = match instance {
        Instance::Gbp(g) => super::GbpInstance::new(g.n, g.weights.clone(), g.imbalance, g.mu, g.lambda)?.into(),
        Instance::Qkp(q) => super::QkpInstance::with_slack_bits(
            q.n,
            q.profits.clone(),
            q.item_weights.clone(),
            q.capacity,
            q.slack_bits,
            q.mu,
            q.lambda,
        )?
        .into(),
        Instance::Ising(i) => super::IsingInstance::new(i.n, i.couplings.clone(), i.fields.clone(), i.scale_by_n)?.into(),
    };
    if rebuilt.variable_count() != instance.variable_count() {
        return Err(Error::InvalidArgument("inconsistent instance document".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{generate_gbp, generate_ising, generate_qkp, IsingKind};
    use proptest::prelude::*;

    #[test]
    fn document_carries_kind_and_prng() {
        let text = instance_to_json(&generate_gbp(4, 0, 1.0, -0.5, 3).unwrap().into()).unwrap();
        let v: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["kind"], "gbp");
        assert_eq!(v["prng_id"], PRNG_ID);
        assert_eq!(v["seed"], 3);
    }

    #[test]
    fn rejects_invalid_documents() {
        let bad = r#"{"kind":"gbp","n":3,"weights":[1,1,1],"imbalance":0,"mu":1,"lambda":0}"#;
        assert!(matches!(instance_from_json(bad), Err(Error::InfeasibleConfiguration(_))));
        assert!(instance_from_json("{").is_err());
    }

    proptest! {
        #[test]
        fn lossless_round_trip(seed in any::<u64>(), which in 0u8..3, mu in 0.01f64..5.0, lambda in -3.0f64..3.0) {
            let inst: Instance = match which {
                0 => generate_gbp(5, 1, mu, lambda, seed).unwrap().into(),
                1 => generate_qkp(4, 3, mu, lambda, seed).unwrap().into(),
                _ => generate_ising(4, IsingKind::Af, seed).unwrap().into(),
            };
            let back = instance_from_json(&instance_to_json(&inst).unwrap()).unwrap();
            prop_assert_eq!(back, inst);
        }
    }
}
