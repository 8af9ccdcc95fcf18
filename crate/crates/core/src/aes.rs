//! Rijndael with a 128-bit block and 128/192/256-bit keys.
//!
//! Table driven: the S-box and the four round tables for each direction are
//! computed at compile time from the field arithmetic. Decryption uses the
//! equivalent inverse cipher, so both directions run the same round shape.
//!
//! Table lookups are indexed by secret data. This implementation makes no
//! attempt at constant-time execution.

use thiserror::Error;
use zeroize::Zeroize;

/// One cipher block.
pub type Block = [u8; 16];

pub const BLOCK_LEN: usize = 16;

const MAX_ROUND_WORDS: usize = 4 * (14 + 1);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("invalid AES key length {0} (expected 16, 24 or 32 bytes)")]
pub struct InvalidKeyLength(pub usize);

/// AES variant, identified by key length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum KeySize {
    Aes128,
    Aes192,
    Aes256,
}

impl KeySize {
    pub const ALL: [KeySize; 3] = [KeySize::Aes128, KeySize::Aes192, KeySize::Aes256];

    pub fn from_key_len(len: usize) -> Result<Self, InvalidKeyLength> {
        match len {
            16 => Ok(KeySize::Aes128),
            24 => Ok(KeySize::Aes192),
            32 => Ok(KeySize::Aes256),
            n => Err(InvalidKeyLength(n)),
        }
    }

    pub fn from_bits(bits: u32) -> Option<Self> {
        match bits {
            128 => Some(KeySize::Aes128),
            192 => Some(KeySize::Aes192),
            256 => Some(KeySize::Aes256),
            _ => None,
        }
    }

    /// On-disk code: 0, 1, 2.
    pub fn from_code(code: u8) -> Option<Self> {
        Self::ALL.get(code as usize).copied()
    }

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn key_len(self) -> usize {
        match self {
            KeySize::Aes128 => 16,
            KeySize::Aes192 => 24,
            KeySize::Aes256 => 32,
        }
    }

    pub fn bits(self) -> u32 {
        self.key_len() as u32 * 8
    }

    pub fn rounds(self) -> usize {
        match self {
            KeySize::Aes128 => 10,
            KeySize::Aes192 => 12,
            KeySize::Aes256 => 14,
        }
    }
}

const fn xtime(b: u8) -> u8 {
    (b << 1) ^ (((b >> 7) & 1) * 0x1b)
}

const fn gf_mul(mut a: u8, mut b: u8) -> u8 {
    let mut acc = 0;
    while b != 0 {
        if b & 1 != 0 {
            acc ^= a;
        }
        a = xtime(a);
        b >>= 1;
    }
    acc
}

// Walks the multiplicative group with generator 3; q tracks 3^-k, so each
// step yields an (element, inverse) pair for the affine transform.
const fn build_sbox() -> [u8; 256] {
    let mut sbox = [0u8; 256];
    let mut p: u8 = 1;
    let mut q: u8 = 1;
    loop {
        p = p ^ (p << 1) ^ if p & 0x80 != 0 { 0x1b } else { 0 };
        q ^= q << 1;
        q ^= q << 2;
        q ^= q << 4;
        if q & 0x80 != 0 {
            q ^= 0x09;
        }
        let affine =
            q ^ q.rotate_left(1) ^ q.rotate_left(2) ^ q.rotate_left(3) ^ q.rotate_left(4);
        sbox[p as usize] = affine ^ 0x63;
        if p == 1 {
            break;
        }
    }
    sbox[0] = 0x63;
    sbox
}

const fn invert(table: &[u8; 256]) -> [u8; 256] {
    let mut inv = [0u8; 256];
    let mut i = 0;
    while i < 256 {
        inv[table[i] as usize] = i as u8;
        i += 1;
    }
    inv
}

const fn column_table(sbox: &[u8; 256], coeffs: [u8; 4], rot: u32) -> [u32; 256] {
    let mut table = [0u32; 256];
    let mut i = 0;
    while i < 256 {
        let s = sbox[i];
        let word = u32::from_be_bytes([
            gf_mul(s, coeffs[0]),
            gf_mul(s, coeffs[1]),
            gf_mul(s, coeffs[2]),
            gf_mul(s, coeffs[3]),
        ]);
        table[i] = word.rotate_right(rot);
        i += 1;
    }
    table
}

pub(crate) const SBOX: [u8; 256] = build_sbox();
const INV_SBOX: [u8; 256] = invert(&SBOX);

const ENC: [u32; 256] = column_table(&SBOX, [2, 1, 1, 3], 0);
const ENC1: [u32; 256] = column_table(&SBOX, [2, 1, 1, 3], 8);
const ENC2: [u32; 256] = column_table(&SBOX, [2, 1, 1, 3], 16);
const ENC3: [u32; 256] = column_table(&SBOX, [2, 1, 1, 3], 24);

const DEC: [u32; 256] = column_table(&INV_SBOX, [14, 9, 13, 11], 0);
const DEC1: [u32; 256] = column_table(&INV_SBOX, [14, 9, 13, 11], 8);
const DEC2: [u32; 256] = column_table(&INV_SBOX, [14, 9, 13, 11], 16);
const DEC3: [u32; 256] = column_table(&INV_SBOX, [14, 9, 13, 11], 24);

// InvMixColumns of a single column word, via the decryption tables:
// DEC[SBOX[b]] is the InvMixColumns column of the byte b.
fn inv_mix_column(w: u32) -> u32 {
    let [a, b, c, d] = w.to_be_bytes();
    DEC[SBOX[a as usize] as usize]
        ^ DEC1[SBOX[b as usize] as usize]
        ^ DEC2[SBOX[c as usize] as usize]
        ^ DEC3[SBOX[d as usize] as usize]
}

fn sub_word(w: u32) -> u32 {
    let [a, b, c, d] = w.to_be_bytes();
    u32::from_be_bytes([
        SBOX[a as usize],
        SBOX[b as usize],
        SBOX[c as usize],
        SBOX[d as usize],
    ])
}

/// Expanded round keys for one AES key, in both directions.
#[derive(Clone)]
pub struct KeySchedule {
    size: KeySize,
    enc: [u32; MAX_ROUND_WORDS],
    // Equivalent-inverse-cipher keys: reversed, InvMixColumns applied to the
    // inner rounds.
    dec: [u32; MAX_ROUND_WORDS],
}

impl std::fmt::Debug for KeySchedule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("KeySchedule")
            .field("size", &self.size)
            .finish_non_exhaustive()
    }
}

impl Drop for KeySchedule {
    fn drop(&mut self) {
        self.enc.zeroize();
        self.dec.zeroize();
    }
}

/// Expands a 16, 24 or 32 byte key.
pub fn expand_key(key: &[u8]) -> Result<KeySchedule, InvalidKeyLength> {
    let size = KeySize::from_key_len(key.len())?;
    let nk = key.len() / 4;
    let total = 4 * (size.rounds() + 1);

    let mut enc = [0u32; MAX_ROUND_WORDS];
    for (word, chunk) in enc.iter_mut().zip(key.chunks_exact(4)) {
        *word = u32::from_be_bytes(chunk.try_into().unwrap());
    }
    let mut rcon: u8 = 1;
    for i in nk..total {
        let mut temp = enc[i - 1];
        if i % nk == 0 {
            temp = sub_word(temp.rotate_left(8)) ^ ((rcon as u32) << 24);
            rcon = xtime(rcon);
        } else if nk > 6 && i % nk == 4 {
            temp = sub_word(temp);
        }
        enc[i] = enc[i - nk] ^ temp;
    }

    let nr = size.rounds();
    let mut dec = [0u32; MAX_ROUND_WORDS];
    for round in 0..=nr {
        for col in 0..4 {
            let w = enc[4 * (nr - round) + col];
            dec[4 * round + col] = if round == 0 || round == nr {
                w
            } else {
                inv_mix_column(w)
            };
        }
    }

    Ok(KeySchedule { size, enc, dec })
}

impl KeySchedule {
    pub fn key_size(&self) -> KeySize {
        self.size
    }

    pub fn rounds(&self) -> usize {
        self.size.rounds()
    }

    /// The `rounds() + 1` encryption round keys, in application order.
    pub fn round_keys(&self) -> Vec<Block> {
        self.enc[..4 * (self.rounds() + 1)]
            .chunks_exact(4)
            .map(|words| {
                let mut rk = [0u8; 16];
                for (dst, w) in rk.chunks_exact_mut(4).zip(words) {
                    dst.copy_from_slice(&w.to_be_bytes());
                }
                rk
            })
            .collect()
    }

    pub fn encrypt_block(&self, block: &Block) -> Block {
        let mut out = *block;
        self.encrypt_in_place(&mut out);
        out
    }

    pub fn decrypt_block(&self, block: &Block) -> Block {
        let mut out = *block;
        self.decrypt_in_place(&mut out);
        out
    }

    #[inline]
    pub fn encrypt_in_place(&self, block: &mut Block) {
        let rk = &self.enc;
        let nr = self.rounds();
        let mut s = load(block, &rk[0..4]);
        for round in 1..nr {
            let k = &rk[4 * round..4 * round + 4];
            s = [
                ENC[byte(s[0], 3)] ^ ENC1[byte(s[1], 2)] ^ ENC2[byte(s[2], 1)] ^ ENC3[byte(s[3], 0)] ^ k[0],
                ENC[byte(s[1], 3)] ^ ENC1[byte(s[2], 2)] ^ ENC2[byte(s[3], 1)] ^ ENC3[byte(s[0], 0)] ^ k[1],
                ENC[byte(s[2], 3)] ^ ENC1[byte(s[3], 2)] ^ ENC2[byte(s[0], 1)] ^ ENC3[byte(s[1], 0)] ^ k[2],
                ENC[byte(s[3], 3)] ^ ENC1[byte(s[0], 2)] ^ ENC2[byte(s[1], 1)] ^ ENC3[byte(s[2], 0)] ^ k[3],
            ];
        }
        let k = &rk[4 * nr..4 * nr + 4];
        let s = [
            final_word(&SBOX, s[0], s[1], s[2], s[3]) ^ k[0],
            final_word(&SBOX, s[1], s[2], s[3], s[0]) ^ k[1],
            final_word(&SBOX, s[2], s[3], s[0], s[1]) ^ k[2],
            final_word(&SBOX, s[3], s[0], s[1], s[2]) ^ k[3],
        ];
        store(block, s);
    }

    #[inline]
    pub fn decrypt_in_place(&self, block: &mut Block) {
        let rk = &self.dec;
        let nr = self.rounds();
        let mut s = load(block, &rk[0..4]);
        for round in 1..nr {
            let k = &rk[4 * round..4 * round + 4];
            s = [
                DEC[byte(s[0], 3)] ^ DEC1[byte(s[3], 2)] ^ DEC2[byte(s[2], 1)] ^ DEC3[byte(s[1], 0)] ^ k[0],
                DEC[byte(s[1], 3)] ^ DEC1[byte(s[0], 2)] ^ DEC2[byte(s[3], 1)] ^ DEC3[byte(s[2], 0)] ^ k[1],
                DEC[byte(s[2], 3)] ^ DEC1[byte(s[1], 2)] ^ DEC2[byte(s[0], 1)] ^ DEC3[byte(s[3], 0)] ^ k[2],
                DEC[byte(s[3], 3)] ^ DEC1[byte(s[2], 2)] ^ DEC2[byte(s[1], 1)] ^ DEC3[byte(s[0], 0)] ^ k[3],
            ];
        }
        let k = &rk[4 * nr..4 * nr + 4];
        let s = [
            final_word(&INV_SBOX, s[0], s[3], s[2], s[1]) ^ k[0],
            final_word(&INV_SBOX, s[1], s[0], s[3], s[2]) ^ k[1],
            final_word(&INV_SBOX, s[2], s[1], s[0], s[3]) ^ k[2],
            final_word(&INV_SBOX, s[3], s[2], s[1], s[0]) ^ k[3],
        ];
        store(block, s);
    }
}

/// Encrypts one block under an expanded key.
pub fn encrypt_block(ks: &KeySchedule, block: &Block) -> Block {
    ks.encrypt_block(block)
}

/// Decrypts one block under an expanded key.
pub fn decrypt_block(ks: &KeySchedule, block: &Block) -> Block {
    ks.decrypt_block(block)
}

#[inline(always)]
fn byte(w: u32, i: u32) -> usize {
    ((w >> (8 * i)) & 0xff) as usize
}

#[inline(always)]
fn final_word(sbox: &[u8; 256], a: u32, b: u32, c: u32, d: u32) -> u32 {
    u32::from_be_bytes([
        sbox[byte(a, 3)],
        sbox[byte(b, 2)],
        sbox[byte(c, 1)],
        sbox[byte(d, 0)],
    ])
}

#[inline(always)]
fn load(block: &Block, k: &[u32]) -> [u32; 4] {
    let mut s = [0u32; 4];
    for (i, w) in s.iter_mut().enumerate() {
        *w = u32::from_be_bytes(block[4 * i..4 * i + 4].try_into().unwrap()) ^ k[i];
    }
    s
}

#[inline(always)]
fn store(block: &mut Block, s: [u32; 4]) {
    for (i, w) in s.iter().enumerate() {
        block[4 * i..4 * i + 4].copy_from_slice(&w.to_be_bytes());
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h(s: &str) -> Vec<u8> {
        hex::decode(s).unwrap()
    }

    #[test]
    fn sbox_spot_values() {
        assert_eq!(SBOX[0x00], 0x63);
        assert_eq!(SBOX[0x01], 0x7c);
        assert_eq!(SBOX[0x53], 0xed);
        assert_eq!(SBOX[0xff], 0x16);
        assert_eq!(INV_SBOX[0x63], 0x00);
    }

    #[test]
    fn round_counts_follow_key_length() {
        for (len, nr) in [(16, 10), (24, 12), (32, 14)] {
            let ks = expand_key(&vec![0u8; len]).unwrap();
            assert_eq!(ks.rounds(), nr);
            assert_eq!(ks.round_keys().len(), nr + 1);
        }
    }

    #[test]
    fn rejects_other_key_lengths() {
        for len in [0, 1, 15, 17, 20, 31, 33, 64] {
            assert_eq!(expand_key(&vec![0u8; len]).unwrap_err(), InvalidKeyLength(len));
        }
    }

    #[test]
    fn aes128_expansion_matches_standard_last_round_key() {
        let ks = expand_key(&h("2b7e151628aed2a6abf7158809cf4f3c")).unwrap();
        let rks = ks.round_keys();
        assert_eq!(rks[0].to_vec(), h("2b7e151628aed2a6abf7158809cf4f3c"));
        assert_eq!(rks[10].to_vec(), h("d014f9a8c9ee2589e13f0cc8b6630ca6"));
    }

    #[test]
    fn zero_key_zero_block_round_trip() {
        let ks = expand_key(&[0u8; 16]).unwrap();
        let ct = encrypt_block(&ks, &[0u8; 16]);
        assert_ne!(ct, [0u8; 16]);
        assert_eq!(decrypt_block(&ks, &ct), [0u8; 16]);
    }

    #[test]
    fn key_size_codes() {
        for ks in KeySize::ALL {
            assert_eq!(KeySize::from_code(ks.code()), Some(ks));
            assert_eq!(KeySize::from_bits(ks.bits()), Some(ks));
        }
        assert_eq!(KeySize::from_code(3), None);
        assert_eq!(KeySize::Aes256.code(), 2);
    }
}
