//! Extended Hamming SECDED code.
//!
//! Code positions run from 1 to `data_bits + r`. Parity bit `i` sits at
//! position `2^i` and covers every position with bit `i` set; data fills the
//! remaining positions in order. One extra bit holds the overall parity.
//! Check bits are packed as `[p0 .. p(r-1), overall]`.

use crate::error::{Error, Result};

/// Where check bits are stored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Placement {
    /// In spare columns of the same row, reachable by the Trojan.
    #[default]
    Inline,
    /// In a separate memory the Trojan cannot touch.
    Trusted,
}

/// ECC width sometimes quoted for 64-bit words; too small for SECDED.
pub const QUOTED_CHECK_BITS_64: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EccConfig {
    pub data_bits: usize,
    pub check_bits: usize,
    pub placement: Placement,
}

impl Default for EccConfig {
    fn default() -> Self {
        EccConfig { data_bits: 64, check_bits: 8, placement: Placement::Inline }
    }
}

/// Hamming parity bits needed for `data_bits`, without the overall bit.
pub fn hamming_parity_bits(data_bits: usize) -> usize {
    let mut r = 0;
    while (1usize << r) < data_bits + r + 1 {
        r += 1;
    }
    r
}

impl EccConfig {
    pub fn validate(&self) -> Result<()> {
        if self.data_bits == 0 || self.data_bits > 64 {
            return Err(Error::Config("ECC data width must be 1..=64"));
        }
        if self.check_bits != hamming_parity_bits(self.data_bits) + 1 {
            return Err(Error::Config("check_bits does not give single-correct double-detect for this width"));
        }
        Ok(())
    }

    fn parity_bits(&self) -> usize {
        self.check_bits - 1
    }

    fn mask(&self) -> u64 {
        if self.data_bits == 64 {
            u64::MAX
        } else {
            (1u64 << self.data_bits) - 1
        }
    }

    /// Code position of data bit `j`.
    fn position(&self, j: usize) -> usize {
        let mut pos = 0usize;
        let mut seen = 0;
        loop {
            pos += 1;
            if !pos.is_power_of_two() {
                if seen == j {
                    return pos;
                }
                seen += 1;
            }
        }
    }

    /// Data bit at code position `pos`, if any.
    fn data_index(&self, pos: usize) -> Option<usize> {
        if pos == 0 || pos.is_power_of_two() {
            return None;
        }
        let j = pos - 1 - (usize::BITS - pos.leading_zeros()) as usize;
        (j < self.data_bits).then_some(j)
    }

    fn syndrome_of(&self, data: u64) -> u32 {
        let mut s = 0u32;
        for j in 0..self.data_bits {
            if (data >> j) & 1 == 1 {
                s ^= self.position(j) as u32;
            }
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Codeword {
    pub data: u64,
    pub check: u16,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EccStatus {
    Ok,
    /// One data or check bit was wrong and has been fixed.
    Corrected,
    /// Two (or an odd number above one, aliased) errors.
    Uncorrectable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Decoded {
    pub data: u64,
    pub status: EccStatus,
    /// Nonzero when any check disagreed.
    pub syndrome: u32,
}

pub fn ecc_encode(data: u64, cfg: &EccConfig) -> Result<Codeword> {
    cfg.validate()?;
    if data & !cfg.mask() != 0 {
        return Err(Error::Width { got: 64 - data.leading_zeros() as usize, expected: cfg.data_bits });
    }
    let r = cfg.parity_bits();
    let mut check = cfg.syndrome_of(data) as u16;
    let overall = (data.count_ones() + check.count_ones()) & 1;
    check |= (overall as u16) << r;
    Ok(Codeword { data, check })
}

pub fn ecc_decode(cw: &Codeword, cfg: &EccConfig) -> Result<Decoded> {
    cfg.validate()?;
    let r = cfg.parity_bits();
    if cw.data & !cfg.mask() != 0 || u32::from(cw.check) >> cfg.check_bits != 0 {
        return Err(Error::Width { got: cfg.data_bits + cfg.check_bits + 1, expected: cfg.data_bits + cfg.check_bits });
    }
    let stored = u32::from(cw.check) & ((1 << r) - 1);
    let syndrome = cfg.syndrome_of(cw.data) ^ stored;
    let overall = (cw.data.count_ones() + u32::from(cw.check).count_ones()) & 1;
    let flag = syndrome | (overall << r);

    let (data, status) = match (syndrome, overall) {
        (0, 0) => (cw.data, EccStatus::Ok),
        (0, 1) => (cw.data, EccStatus::Corrected),
        (s, 1) if (s as usize).is_power_of_two() => (cw.data, EccStatus::Corrected),
        (s, 1) => match cfg.data_index(s as usize) {
            Some(j) => (cw.data ^ (1u64 << j), EccStatus::Corrected),
            None => (cw.data, EccStatus::Uncorrectable),
        },
        _ => (cw.data, EccStatus::Uncorrectable),
    };
    Ok(Decoded { data, status, syndrome: flag })
}
