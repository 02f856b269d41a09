//! SECDED checked against an explicit 8 x 72 parity-check matrix.

use dramtrojan_core::defense::{ecc_decode, ecc_encode, Codeword, EccConfig, EccStatus};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Columns of H: data bits 0..64, then check bits 0..8. Bit 7 is the overall row.
fn parity_matrix() -> [u8; 72] {
    let mut h = [0u8; 72];
    let mut n = 0usize;
    let mut candidate = 3u8;
    while n < 64 {
        if candidate & (candidate - 1) != 0 {
            h[n] = candidate | 0x80;
            n += 1;
        }
        candidate += 1;
    }
    for i in 0..7 {
        h[64 + i] = (1 << i) | 0x80;
    }
    h[71] = 0x80;
    h
}

fn bits_of(cw: &Codeword) -> [bool; 72] {
    let mut b = [false; 72];
    for (i, v) in b.iter_mut().enumerate() {
        *v = if i < 64 { (cw.data >> i) & 1 == 1 } else { (cw.check >> (i - 64)) & 1 == 1 };
    }
    b
}

fn codeword_of(b: &[bool; 72]) -> Codeword {
    let data = (0..64).fold(0u64, |a, i| a | ((b[i] as u64) << i));
    let check = (0..8).fold(0u16, |a, i| a | ((b[64 + i] as u16) << i));
    Codeword { data, check }
}

fn syndrome(h: &[u8; 72], b: &[bool; 72]) -> u8 {
    h.iter().zip(b).filter(|(_, v)| **v).fold(0, |s, (c, _)| s ^ c)
}

#[derive(Debug, PartialEq)]
enum Oracle {
    Ok,
    Flip(usize),
    Detected,
}

fn oracle(h: &[u8; 72], b: &[bool; 72]) -> Oracle {
    match syndrome(h, b) {
        0 => Oracle::Ok,
        s => h.iter().position(|c| *c == s).map_or(Oracle::Detected, Oracle::Flip),
    }
}

fn words() -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut w: Vec<u64> = (0..100).map(|_| rng.random()).collect();
    w.extend([0, u64::MAX, 1, 1 << 63]);
    w
}

#[test]
fn encoder_output_is_in_the_oracle_code() {
    let (h, cfg) = (parity_matrix(), EccConfig::default());
    for w in words() {
        let cw = ecc_encode(w, &cfg).unwrap();
        assert_eq!(syndrome(&h, &bits_of(&cw)), 0, "word {w:#x}");
        let d = ecc_decode(&cw, &cfg).unwrap();
        assert_eq!((d.data, d.status), (w, EccStatus::Ok));
    }
}

#[test]
fn every_single_flip_is_corrected() {
    let (h, cfg) = (parity_matrix(), EccConfig::default());
    for w in words() {
        let clean = bits_of(&ecc_encode(w, &cfg).unwrap());
        for i in 0..72 {
            let mut b = clean;
            b[i] = !b[i];
            assert_eq!(oracle(&h, &b), Oracle::Flip(i));
            let d = ecc_decode(&codeword_of(&b), &cfg).unwrap();
            assert_eq!(d.status, EccStatus::Corrected, "word {w:#x} bit {i}");
            assert_eq!(d.data, w);
        }
    }
}

#[test]
fn every_double_flip_is_detected() {
    let (h, cfg) = (parity_matrix(), EccConfig::default());
    for w in words() {
        let clean = bits_of(&ecc_encode(w, &cfg).unwrap());
        for i in 0..72 {
            for j in i + 1..72 {
                let mut b = clean;
                b[i] = !b[i];
                b[j] = !b[j];
                assert_eq!(oracle(&h, &b), Oracle::Detected);
                let d = ecc_decode(&codeword_of(&b), &cfg).unwrap();
                assert_eq!(d.status, EccStatus::Uncorrectable, "word {w:#x} bits {i},{j}");
            }
        }
    }
}
