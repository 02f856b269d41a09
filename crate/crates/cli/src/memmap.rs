//! Physical address to (row, word) mapping.

use dramtrojan_core::array::ArrayGeometry;

use crate::error::{HarnessError, Result};

/// Where DRAM starts in the physical address space.
pub const DRAM_BASE: u64 = 0x8000_0000;

/// Row-major, word-granular map of the array into the address space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MemoryMap {
    pub dram_base: u64,
    pub rows: usize,
    pub words_per_row: usize,
    /// Bytes per word.
    pub word_bytes: u64,
}

impl MemoryMap {
    pub fn new(dram_base: u64, geometry: &ArrayGeometry) -> Self {
        MemoryMap {
            dram_base,
            rows: geometry.rows,
            words_per_row: geometry.words_per_row(),
            word_bytes: geometry.word_bits.div_ceil(8) as u64,
        }
    }

    pub fn capacity_bytes(&self) -> u64 {
        (self.rows * self.words_per_row) as u64 * self.word_bytes
    }

    /// `(row, word)` holding `addr`.
    pub fn cell_of(&self, addr: u64) -> Result<(usize, usize)> {
        let off = addr.checked_sub(self.dram_base).ok_or(HarnessError::Address { addr, reason: "below DRAM base" })?;
        if off >= self.capacity_bytes() {
            return Err(HarnessError::Address { addr, reason: "beyond modeled capacity" });
        }
        if off % self.word_bytes != 0 {
            return Err(HarnessError::Address { addr, reason: "not word aligned" });
        }
        let idx = (off / self.word_bytes) as usize;
        Ok((idx / self.words_per_row, idx % self.words_per_row))
    }

    pub fn addr_of(&self, row: usize, word: usize) -> Result<u64> {
        if row >= self.rows || word >= self.words_per_row {
            return Err(HarnessError::Scenario(format!("cell ({row}, {word}) outside the array")));
        }
        Ok(self.dram_base + (row * self.words_per_row + word) as u64 * self.word_bytes)
    }
}
