use crate::error::{Error, Result};

use super::ecc::Placement;

/// Per-word CRC. `polynomial` includes the `x^width` term.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CrcConfig {
    pub polynomial: u64,
    pub width: usize,
    pub placement: Placement,
}

impl Default for CrcConfig {
    /// CRC-8, x^8 + x^2 + x + 1.
    fn default() -> Self {
        CrcConfig { polynomial: 0x107, width: 8, placement: Placement::Inline }
    }
}

impl CrcConfig {
    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.width > 32 {
            return Err(Error::Config("CRC width must be 1..=32"));
        }
        if 63 - self.polynomial.leading_zeros() as usize != self.width {
            return Err(Error::Config("CRC polynomial degree must equal its width"));
        }
        if self.polynomial & 1 == 0 {
            return Err(Error::Config("CRC polynomial needs a nonzero constant term"));
        }
        Ok(())
    }
}

/// Remainder of `data(x) * x^width` modulo the polynomial, over `bits` bits.
pub fn crc(data: u64, bits: usize, cfg: &CrcConfig) -> Result<u32> {
    cfg.validate()?;
    let w = cfg.width;
    let mut reg: u64 = 0;
    for i in (0..bits).rev() {
        let top = ((reg >> (w - 1)) & 1) ^ ((data >> i) & 1);
        reg = (reg << 1) & ((1u64 << w) - 1);
        if top == 1 {
            reg ^= cfg.polynomial & ((1u64 << w) - 1);
        }
    }
    Ok(reg as u32)
}
