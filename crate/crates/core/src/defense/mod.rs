//! Run-time defenses and attack classification.
//!
//! A protected row is laid out as
//! `[data words][per-word ECC + CRC check bits][dummy bits][unused]`.
//! With [`Placement::Trusted`] the check columns are left unused and the
//! check bits captured at write time are supplied through [`CheckContext`].

mod crc;
mod ecc;

use alloc::vec;
use alloc::vec::Vec;

use crate::array::Event;
use crate::error::{Error, Result};

pub use crc::{crc, CrcConfig};
pub use ecc::{
    ecc_decode, ecc_encode, hamming_parity_bits, Codeword, Decoded, EccConfig, EccStatus, Placement,
    QUOTED_CHECK_BITS_64,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DummyBitsConfig {
    pub bits_per_row: usize,
    pub known_pattern: Vec<bool>,
}

impl DummyBitsConfig {
    /// `bits` dummy cells holding alternating ones and zeros.
    pub fn alternating(bits: usize) -> Self {
        DummyBitsConfig { bits_per_row: bits, known_pattern: (0..bits).map(|i| i % 2 == 0).collect() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.bits_per_row == 0 || self.known_pattern.len() != self.bits_per_row {
            return Err(Error::Config("dummy pattern must have bits_per_row >= 1 entries"));
        }
        Ok(())
    }
}

impl Default for DummyBitsConfig {
    fn default() -> Self {
        Self::alternating(8)
    }
}

/// Which defenses a row carries.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DefenseConfig {
    pub ecc: Option<EccConfig>,
    pub crc: Option<CrcConfig>,
    pub dummy: Option<DummyBitsConfig>,
}

/// Check bits of one word as written.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct WordChecks {
    pub ecc: u16,
    pub crc: u32,
}

/// Column layout of a protected row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowLayout {
    pub cols: usize,
    pub word_bits: usize,
    pub data_words: usize,
    pub defenses: DefenseConfig,
}

impl RowLayout {
    /// Packs as many data words as fit alongside the configured check and
    /// dummy columns.
    pub fn fit(cols: usize, word_bits: usize, defenses: DefenseConfig) -> Result<Self> {
        let probe = RowLayout { cols, word_bits, data_words: 0, defenses };
        probe.validate_configs()?;
        let per_word = word_bits + probe.inline_bits_per_word();
        let dummy = probe.defenses.dummy.as_ref().map_or(0, |d| d.bits_per_row);
        if cols < dummy + per_word {
            return Err(Error::Config("row too narrow for one protected word"));
        }
        Ok(RowLayout { data_words: (cols - dummy) / per_word, ..probe })
    }

    fn validate_configs(&self) -> Result<()> {
        if let Some(e) = &self.defenses.ecc {
            e.validate()?;
            if e.data_bits != self.word_bits {
                return Err(Error::Config("ECC data width must equal the word width"));
            }
        }
        if let Some(c) = &self.defenses.crc {
            c.validate()?;
        }
        if let Some(d) = &self.defenses.dummy {
            d.validate()?;
        }
        Ok(())
    }

    fn ecc_inline_bits(&self) -> usize {
        match &self.defenses.ecc {
            Some(e) if e.placement == Placement::Inline => e.check_bits,
            _ => 0,
        }
    }

    fn crc_inline_bits(&self) -> usize {
        match &self.defenses.crc {
            Some(c) if c.placement == Placement::Inline => c.width,
            _ => 0,
        }
    }

    fn inline_bits_per_word(&self) -> usize {
        self.ecc_inline_bits() + self.crc_inline_bits()
    }

    fn check_base(&self, word: usize) -> usize {
        self.data_words * self.word_bits + word * self.inline_bits_per_word()
    }

    fn dummy_base(&self) -> usize {
        self.data_words * (self.word_bits + self.inline_bits_per_word())
    }

    /// Check bits `words` would carry.
    pub fn checks(&self, words: &[u64]) -> Result<Vec<WordChecks>> {
        words
            .iter()
            .map(|w| {
                let ecc = match &self.defenses.ecc {
                    Some(e) => ecc_encode(*w, e)?.check,
                    None => 0,
                };
                let crc = match &self.defenses.crc {
                    Some(c) => crc(*w, self.word_bits, c)?,
                    None => 0,
                };
                Ok(WordChecks { ecc, crc })
            })
            .collect()
    }

    /// Full row image for `words`, including inline checks and dummy bits.
    pub fn provision(&self, words: &[u64]) -> Result<Vec<bool>> {
        if words.len() != self.data_words {
            return Err(Error::Width { got: words.len(), expected: self.data_words });
        }
        let mut bits = vec![false; self.cols];
        for (i, w) in words.iter().enumerate() {
            put(&mut bits, i * self.word_bits, self.word_bits, *w);
        }
        self.write_inline_checks(&mut bits)?;
        if let Some(d) = &self.defenses.dummy {
            let base = self.dummy_base();
            bits[base..base + d.bits_per_row].copy_from_slice(&d.known_pattern);
        }
        Ok(bits)
    }

    /// Data words of a row image.
    pub fn words(&self, bits: &[bool]) -> Vec<u64> {
        (0..self.data_words).map(|i| get(bits, i * self.word_bits, self.word_bits)).collect()
    }

    /// Rewrites the inline check columns to match the current data. This is
    /// the tampering a Trojan with access to the check columns can perform.
    pub fn write_inline_checks(&self, bits: &mut [bool]) -> Result<()> {
        let checks = self.checks(&self.words(bits))?;
        let (eb, cb) = (self.ecc_inline_bits(), self.crc_inline_bits());
        for (i, c) in checks.iter().enumerate() {
            let base = self.check_base(i);
            put(bits, base, eb, u64::from(c.ecc));
            put(bits, base + eb, cb, u64::from(c.crc));
        }
        Ok(())
    }

    fn inline_checks(&self, bits: &[bool], word: usize) -> WordChecks {
        let (eb, cb) = (self.ecc_inline_bits(), self.crc_inline_bits());
        let base = self.check_base(word);
        WordChecks { ecc: get(bits, base, eb) as u16, crc: get(bits, base + eb, cb) as u32 }
    }
}

fn put(bits: &mut [bool], start: usize, len: usize, value: u64) {
    for i in 0..len {
        bits[start + i] = (value >> i) & 1 == 1;
    }
}

fn get(bits: &[bool], start: usize, len: usize) -> u64 {
    (0..len).fold(0, |acc, i| acc | ((bits[start + i] as u64) << i))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DetectionOutcome {
    Clean,
    Corrected,
    Detected,
    UndetectedCorruption,
    LeakageUndetected,
}

/// What the checker knows besides the row image.
#[derive(Debug, Clone, Copy, Default)]
pub struct CheckContext<'a> {
    /// Data the owner last wrote, for scoring silent corruption.
    pub expected: Option<&'a [u64]>,
    /// Check bits captured at write time (required for trusted placement).
    pub trusted: Option<&'a [WordChecks]>,
    /// The run log shows victim data copied into this row.
    pub leaked_into: bool,
}

/// Classifies one row readout.
pub fn check_row(bits: &[bool], layout: &RowLayout, ctx: &CheckContext) -> Result<DetectionOutcome> {
    if bits.len() != layout.cols {
        return Err(Error::Width { got: bits.len(), expected: layout.cols });
    }
    let mut detected = false;
    let mut corrected = false;

    if let Some(d) = &layout.defenses.dummy {
        let base = layout.dummy_base();
        detected |= bits[base..base + d.bits_per_row] != d.known_pattern[..];
    }

    let words = layout.words(bits);
    let mut recovered = words.clone();
    for (i, w) in words.iter().enumerate() {
        let inline = layout.inline_checks(bits, i);
        let trusted = |what: &'static str| -> Result<WordChecks> {
            ctx.trusted.and_then(|t| t.get(i).copied()).ok_or(Error::Config(what))
        };
        let mut data = *w;
        if let Some(e) = &layout.defenses.ecc {
            let stored = match e.placement {
                Placement::Inline => inline.ecc,
                Placement::Trusted => trusted("trusted ECC bits missing")?.ecc,
            };
            let d = ecc_decode(&Codeword { data, check: stored }, e)?;
            match (e.placement, d.status) {
                (_, EccStatus::Ok) => {}
                // a trusted store cannot be tampered with, so any mismatch is an alarm
                (Placement::Trusted, _) | (_, EccStatus::Uncorrectable) => detected = true,
                (Placement::Inline, EccStatus::Corrected) => {
                    corrected = true;
                    data = d.data;
                }
            }
        }
        if let Some(c) = &layout.defenses.crc {
            let stored = match c.placement {
                Placement::Inline => inline.crc,
                Placement::Trusted => trusted("trusted CRC bits missing")?.crc,
            };
            detected |= crc(data, layout.word_bits, c)? != stored;
        }
        recovered[i] = data;
    }

    Ok(if detected {
        DetectionOutcome::Detected
    } else if ctx.leaked_into {
        DetectionOutcome::LeakageUndetected
    } else if ctx.expected.is_some_and(|e| e != &recovered[..]) {
        DetectionOutcome::UndetectedCorruption
    } else if corrected {
        DetectionOutcome::Corrected
    } else {
        DetectionOutcome::Clean
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AttackClass {
    Clean,
    FaultInjection,
    Dos,
    InformationLeakage,
}

/// Per-polarity failure counts and leak events of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RunLog {
    pub ones_lost: usize,
    pub zeros_lost: usize,
    pub leaks: usize,
}

impl RunLog {
    pub fn from_events(events: &[Event]) -> Self {
        events.iter().fold(RunLog::default(), |mut log, e| {
            match e {
                Event::RetentionFailure { ones_lost, zeros_lost, .. }
                | Event::PayloadFault { ones_lost, zeros_lost, .. } => {
                    log.ones_lost += ones_lost;
                    log.zeros_lost += zeros_lost;
                }
                Event::Leak { .. } => log.leaks += 1,
                _ => {}
            }
            log
        })
    }
}

pub fn classify_attack(log: &RunLog) -> AttackClass {
    match (log.leaks > 0, log.ones_lost > 0, log.zeros_lost > 0) {
        (true, _, _) => AttackClass::InformationLeakage,
        (false, true, true) => AttackClass::Dos,
        (false, true, false) | (false, false, true) => AttackClass::FaultInjection,
        (false, false, false) => AttackClass::Clean,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn layout(placement: Placement, dummy: bool) -> RowLayout {
        let defenses = DefenseConfig {
            ecc: Some(EccConfig { placement, ..Default::default() }),
            crc: None,
            dummy: dummy.then(DummyBitsConfig::default),
        };
        RowLayout::fit(512, 64, defenses).unwrap()
    }

    #[test]
    fn layout_fits_words() {
        let l = layout(Placement::Inline, true);
        assert_eq!(l.data_words, 7);
        assert_eq!(layout(Placement::Trusted, false).data_words, 8);
    }

    #[test]
    fn untampered_row_is_clean() {
        let l = layout(Placement::Inline, true);
        let words = [1, 2, 3, 4, 5, 6, 7];
        let bits = l.provision(&words).unwrap();
        let ctx = CheckContext { expected: Some(&words), ..Default::default() };
        assert_eq!(check_row(&bits, &l, &ctx).unwrap(), DetectionOutcome::Clean);
    }

    #[test]
    fn single_fault_corrected_inline() {
        let l = layout(Placement::Inline, false);
        let words = [u64::MAX; 8];
        let words = &words[..l.data_words];
        let mut bits = l.provision(words).unwrap();
        bits[70] = !bits[70];
        let ctx = CheckContext { expected: Some(words), ..Default::default() };
        assert_eq!(check_row(&bits, &l, &ctx).unwrap(), DetectionOutcome::Corrected);
    }

    #[test]
    fn dummy_flip_detected() {
        let l = layout(Placement::Inline, true);
        let mut bits = l.provision(&[0; 7]).unwrap();
        let d = l.dummy_base();
        bits[d] = false;
        assert_eq!(check_row(&bits, &l, &CheckContext::default()).unwrap(), DetectionOutcome::Detected);
    }

    #[test]
    fn trusted_requires_captured_bits() {
        let l = layout(Placement::Trusted, false);
        let bits = l.provision(&[0; 8]).unwrap();
        assert!(check_row(&bits, &l, &CheckContext::default()).is_err());
    }

    #[test]
    fn classification() {
        let c = |o, z, l| classify_attack(&RunLog { ones_lost: o, zeros_lost: z, leaks: l });
        assert_eq!(c(0, 0, 0), AttackClass::Clean);
        assert_eq!(c(5, 0, 0), AttackClass::FaultInjection);
        assert_eq!(c(0, 2, 0), AttackClass::FaultInjection);
        assert_eq!(c(5, 2, 0), AttackClass::Dos);
        assert_eq!(c(5, 2, 1), AttackClass::InformationLeakage);
    }

    #[test]
    fn run_log_from_events() {
        let ev = [
            Event::RetentionFailure { time: 0, row: 0, ones_lost: 3, zeros_lost: 0 },
            Event::PayloadFault { time: 1, row: 0, ones_lost: 0, zeros_lost: 2 },
            Event::Leak { time: 2, victim_row: 0, adversary_row: 1, cells: 64 },
            Event::MarginViolation { time: 2, row: 0, cells: 1 },
        ];
        assert_eq!(RunLog::from_events(&ev), RunLog { ones_lost: 3, zeros_lost: 2, leaks: 1 });
    }

    proptest! {
        #[test]
        fn reencoded_tamper_inline_silent_trusted_loud(
            words in proptest::collection::vec(any::<u64>(), 8),
            flips in proptest::collection::btree_set(0usize..64, 1..=3),
            word in 0usize..7,
        ) {
            let inline = layout(Placement::Inline, false);
            let trusted = layout(Placement::Trusted, false);
            let w_in = &words[..inline.data_words];
            let w_tr = &words[..trusted.data_words];

            let mut a = inline.provision(w_in).unwrap();
            let mut b = trusted.provision(w_tr).unwrap();
            let captured = trusted.checks(w_tr).unwrap();
            for f in &flips {
                a[word * 64 + f] = !a[word * 64 + f];
                b[word * 64 + f] = !b[word * 64 + f];
            }
            inline.write_inline_checks(&mut a).unwrap();
            trusted.write_inline_checks(&mut b).unwrap();

            let ca = CheckContext { expected: Some(w_in), ..Default::default() };
            let cb = CheckContext { expected: Some(w_tr), trusted: Some(&captured), ..Default::default() };
            prop_assert_eq!(check_row(&a, &inline, &ca).unwrap(), DetectionOutcome::UndetectedCorruption);
            prop_assert_eq!(check_row(&b, &trusted, &cb).unwrap(), DetectionOutcome::Detected);
        }
    }
}
