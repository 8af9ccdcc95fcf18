//! XTS-AES over fixed 512-byte sectors.
//!
//! The tweak for sector `i` is the AES encryption (under the tweak key) of
//! `i` as a little-endian 128-bit integer. Block `j` of the sector is masked
//! with that tweak multiplied by `x^j` in GF(2^128). Sectors are a whole
//! number of blocks, so no ciphertext stealing is needed.

use crate::aes::{expand_key, Block, InvalidKeyLength, KeySchedule, KeySize, BLOCK_LEN};

pub const SECTOR_SIZE: usize = 512;

/// One storage sector.
pub type Sector = [u8; SECTOR_SIZE];

/// Volume-relative logical sector number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SectorIndex(pub u64);

impl From<u64> for SectorIndex {
    fn from(v: u64) -> Self {
        SectorIndex(v)
    }
}

/// Multiplies a tweak by the primitive element `x` of GF(2^128), reducing by
/// `x^128 + x^7 + x^2 + x + 1`. Bytes are little-endian.
pub fn gf_mul_alpha(tweak: &Block) -> Block {
    let v = u128::from_le_bytes(*tweak);
    let carry = (v >> 127) as u8;
    let mut out = (v << 1).to_le_bytes();
    out[0] ^= 0x87 & 0u8.wrapping_sub(carry);
    out
}

/// Data key schedule and tweak key schedule.
#[derive(Clone, Debug)]
pub struct XtsKeys {
    data: KeySchedule,
    tweak: KeySchedule,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum XtsKeyError {
    #[error(transparent)]
    KeyLength(#[from] InvalidKeyLength),
    #[error("data key and tweak key lengths differ ({data} vs {tweak})")]
    LengthMismatch { data: usize, tweak: usize },
}

impl XtsKeys {
    pub fn new(data_key: &[u8], tweak_key: &[u8]) -> Result<Self, XtsKeyError> {
        if data_key.len() != tweak_key.len() {
            return Err(XtsKeyError::LengthMismatch {
                data: data_key.len(),
                tweak: tweak_key.len(),
            });
        }
        Ok(XtsKeys {
            data: expand_key(data_key)?,
            tweak: expand_key(tweak_key)?,
        })
    }

    /// Splits `material` into data key ‖ tweak key, each `size.key_len()` bytes.
    /// Bytes past `2 * key_len` are ignored.
    ///
    /// Panics if `material` is shorter than `2 * size.key_len()`.
    pub fn from_material(size: KeySize, material: &[u8]) -> Self {
        let k = size.key_len();
        Self::new(&material[..k], &material[k..2 * k]).expect("lengths fixed by key size")
    }

    pub fn key_size(&self) -> KeySize {
        self.data.key_size()
    }

    fn initial_tweak(&self, idx: SectorIndex) -> Block {
        self.tweak
            .encrypt_block(&(idx.0 as u128).to_le_bytes())
    }

    pub fn encrypt_sector_in_place(&self, idx: SectorIndex, sector: &mut Sector) {
        let mut t = self.initial_tweak(idx);
        for chunk in sector.chunks_exact_mut(BLOCK_LEN) {
            let block: &mut Block = chunk.try_into().unwrap();
            xor_in(block, &t);
            self.data.encrypt_in_place(block);
            xor_in(block, &t);
            t = gf_mul_alpha(&t);
        }
    }

    pub fn decrypt_sector_in_place(&self, idx: SectorIndex, sector: &mut Sector) {
        let mut t = self.initial_tweak(idx);
        for chunk in sector.chunks_exact_mut(BLOCK_LEN) {
            let block: &mut Block = chunk.try_into().unwrap();
            xor_in(block, &t);
            self.data.decrypt_in_place(block);
            xor_in(block, &t);
            t = gf_mul_alpha(&t);
        }
    }

    pub fn encrypt_sector(&self, idx: SectorIndex, pt: &Sector) -> Sector {
        let mut out = *pt;
        self.encrypt_sector_in_place(idx, &mut out);
        out
    }

    pub fn decrypt_sector(&self, idx: SectorIndex, ct: &Sector) -> Sector {
        let mut out = *ct;
        self.decrypt_sector_in_place(idx, &mut out);
        out
    }
}

pub fn encrypt_sector(keys: &XtsKeys, idx: SectorIndex, pt: &Sector) -> Sector {
    keys.encrypt_sector(idx, pt)
}

pub fn decrypt_sector(keys: &XtsKeys, idx: SectorIndex, ct: &Sector) -> Sector {
    keys.decrypt_sector(idx, ct)
}

#[inline(always)]
fn xor_in(block: &mut Block, mask: &Block) {
    for (b, m) in block.iter_mut().zip(mask) {
        *b ^= m;
    }
}
