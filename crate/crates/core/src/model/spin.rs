use crate::error::{Error, Result};

/// An assignment of every binary variable of an instance.
///
/// Bit `b_i` maps to spin `s_i = 1 - 2 b_i`, and the basis index is
/// `z = sum_i b_i 2^i` (little-endian).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SpinConfiguration {
    bits: Vec<u8>,
}

impl SpinConfiguration {
    pub fn from_index(index: usize, m: usize) -> Self {
        Self { bits: (0..m).map(|i| ((index >> i) & 1) as u8).collect() }
    }

    pub fn from_bits(bits: Vec<u8>) -> Result<Self> {
        if let Some(&b) = bits.iter().find(|&&b| b > 1) {
            return Err(Error::InvalidArgument(format!("bit value {b} is not 0 or 1")));
        }
        Ok(Self { bits })
    }

    pub fn from_spins(spins: &[i8]) -> Result<Self> {
        spins
            .iter()
            .map(|&s| match s {
                1 => Ok(0),
                -1 => Ok(1),
                other => Err(Error::InvalidArgument(format!("spin value {other} is not +1 or -1"))),
            })
            .collect::<Result<Vec<u8>>>()
            .map(|bits| Self { bits })
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn index(&self) -> usize {
        self.bits.iter().enumerate().map(|(i, &b)| (b as usize) << i).sum()
    }

    #[inline]
    pub fn spin(&self, i: usize) -> i8 {
        1 - 2 * self.bits[i] as i8
    }

    pub fn spins(&self) -> Vec<i8> {
        (0..self.len()).map(|i| self.spin(i)).collect()
    }

    /// Binary variable `x_i = (1 + s_i) / 2`.
    #[inline]
    pub fn binary(&self, i: usize) -> u8 {
        1 - self.bits[i]
    }
}
