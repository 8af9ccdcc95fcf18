//! On-disk container layout and password-sealed volume headers.
//!
//! ```text
//! [0, 4096)        outer header slot
//! [4096, 8192)     hidden header slot (random bytes when no hidden volume)
//! [8192, end)      data region, 512-byte sectors
//! ```
//!
//! A slot is `salt (64) ‖ encrypted payload (512) ‖ random fill (3520)`. The
//! payload is one XTS-AES-256 sector (index 0) under a key derived from the
//! password and salt with PBKDF2-HMAC-SHA-256. The header key is always
//! AES-256 because the volume's own key size is stored inside the payload.
//!
//! Decrypted payload, little-endian:
//!
//! ```text
//! [0, 4)    magic "DTRS"
//! [4, 6)    version = 1
//! [6, 7)    key size code: 0 = AES-128, 1 = AES-192, 2 = AES-256
//! [7, 8)    flags, bit 0 = hidden volume
//! [8, 16)   data offset (container absolute, bytes)
//! [16, 24)  data size (bytes)
//! [24, 88)  master key material
//! [88, 92)  CRC-32 of [0, 88)
//! [92, 512) random fill
//! ```

use rand::{CryptoRng, RngCore};
use thiserror::Error;
use zeroize::Zeroize;

use crate::aes::KeySize;
use crate::kdf::{pbkdf2_hmac_sha256, KdfParams, SALT_LEN};
use crate::sector::{Sector, SectorIndex, XtsKeys, SECTOR_SIZE};

pub const HEADER_SLOT_LEN: usize = 4096;
pub const OUTER_SLOT_OFFSET: u64 = 0;
pub const HIDDEN_SLOT_OFFSET: u64 = 4096;
pub const DATA_REGION_OFFSET: u64 = 8192;
pub const HEADER_PAYLOAD_LEN: usize = SECTOR_SIZE;
pub const MASTER_KEY_MATERIAL_LEN: usize = 64;
pub const FLAG_HIDDEN: u8 = 0x01;

const MAGIC: [u8; 4] = *b"DTRS";
const VERSION: u16 = 1;
const CHECKED_LEN: usize = 88;
const PAYLOAD_OFFSET: usize = SALT_LEN;

const CRC_TABLE: [u32; 256] = {
    let mut table = [0u32; 256];
    let mut i = 0;
    while i < 256 {
        let mut c = i as u32;
        let mut k = 0;
        while k < 8 {
            c = if c & 1 != 0 { 0xEDB8_8320 ^ (c >> 1) } else { c >> 1 };
            k += 1;
        }
        table[i] = c;
        i += 1;
    }
    table
};

/// IEEE CRC-32 (reflected 0xEDB88320, init and final XOR 0xFFFFFFFF).
pub fn crc32(bytes: &[u8]) -> u32 {
    crc32_update(0, bytes)
}

/// Continues a CRC-32 over more input; `crc32_update(crc32(a), b) == crc32(a ‖ b)`.
pub fn crc32_update(crc: u32, bytes: &[u8]) -> u32 {
    let mut c = !crc;
    for &b in bytes {
        c = CRC_TABLE[((c ^ b as u32) & 0xff) as usize] ^ (c >> 8);
    }
    !c
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum HeaderError {
    #[error("bad magic")]
    BadMagic,
    #[error("unsupported version")]
    BadVersion,
    #[error("checksum mismatch")]
    BadChecksum,
    #[error("unknown key size code")]
    BadKeySize,
    #[error("invalid volume geometry")]
    BadGeometry,
    #[error("header field out of range")]
    FieldOutOfRange,
}

/// A header slot did not open. Wrong password, tampering and "no volume
/// here" are deliberately indistinguishable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("authentication failed")]
pub struct AuthFail;

/// Region geometry for a container of a given byte length.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ContainerLayout {
    size: u64,
}

impl ContainerLayout {
    /// Requires at least one data sector and a sector-aligned data region.
    pub fn new(size: u64) -> Result<Self, HeaderError> {
        if size < DATA_REGION_OFFSET + SECTOR_SIZE as u64
            || !(size - DATA_REGION_OFFSET).is_multiple_of(SECTOR_SIZE as u64)
        {
            return Err(HeaderError::BadGeometry);
        }
        Ok(ContainerLayout { size })
    }

    pub fn size(&self) -> u64 {
        self.size
    }

    pub fn data_offset(&self) -> u64 {
        DATA_REGION_OFFSET
    }

    pub fn data_size(&self) -> u64 {
        self.size - DATA_REGION_OFFSET
    }
}

/// Decrypted header fields.
#[derive(Clone, PartialEq, Eq)]
pub struct VolumeHeader {
    pub key_size: KeySize,
    pub flags: u8,
    pub data_offset: u64,
    pub data_size: u64,
    pub master_key_material: [u8; MASTER_KEY_MATERIAL_LEN],
}

impl std::fmt::Debug for VolumeHeader {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("VolumeHeader")
            .field("key_size", &self.key_size)
            .field("flags", &self.flags)
            .field("data_offset", &self.data_offset)
            .field("data_size", &self.data_size)
            .finish_non_exhaustive()
    }
}

impl Drop for VolumeHeader {
    fn drop(&mut self) {
        self.master_key_material.zeroize();
    }
}

impl VolumeHeader {
    /// Fresh header with random master key material.
    pub fn generate<R: RngCore + CryptoRng>(
        key_size: KeySize,
        hidden: bool,
        data_offset: u64,
        data_size: u64,
        rng: &mut R,
    ) -> Self {
        let mut master_key_material = [0u8; MASTER_KEY_MATERIAL_LEN];
        rng.fill_bytes(&mut master_key_material);
        VolumeHeader {
            key_size,
            flags: if hidden { FLAG_HIDDEN } else { 0 },
            data_offset,
            data_size,
            master_key_material,
        }
    }

    pub fn is_hidden(&self) -> bool {
        self.flags & FLAG_HIDDEN != 0
    }

    /// Data key ‖ tweak key taken from the front of the master key material.
    pub fn master_keys(&self) -> XtsKeys {
        XtsKeys::from_material(self.key_size, &self.master_key_material)
    }

    fn geometry_ok(&self) -> bool {
        self.data_offset >= DATA_REGION_OFFSET
            && self.data_size > 0
            && self.data_size.is_multiple_of(SECTOR_SIZE as u64)
            && self.data_offset.checked_add(self.data_size).is_some()
    }

    /// True if the data region lies inside a container of `container_len` bytes.
    pub fn fits(&self, container_len: u64) -> bool {
        self.geometry_ok() && self.data_offset + self.data_size <= container_len
    }
}

pub fn serialize_header<R: RngCore + CryptoRng>(
    h: &VolumeHeader,
    rng: &mut R,
) -> Result<[u8; HEADER_PAYLOAD_LEN], HeaderError> {
    if !h.geometry_ok() {
        return Err(HeaderError::FieldOutOfRange);
    }
    let mut out = [0u8; HEADER_PAYLOAD_LEN];
    out[0..4].copy_from_slice(&MAGIC);
    out[4..6].copy_from_slice(&VERSION.to_le_bytes());
    out[6] = h.key_size.code();
    out[7] = h.flags;
    out[8..16].copy_from_slice(&h.data_offset.to_le_bytes());
    out[16..24].copy_from_slice(&h.data_size.to_le_bytes());
    out[24..88].copy_from_slice(&h.master_key_material);
    let crc = crc32(&out[..CHECKED_LEN]);
    out[88..92].copy_from_slice(&crc.to_le_bytes());
    rng.fill_bytes(&mut out[92..]);
    Ok(out)
}

pub fn parse_header(payload: &[u8; HEADER_PAYLOAD_LEN]) -> Result<VolumeHeader, HeaderError> {
    if payload[0..4] != MAGIC {
        return Err(HeaderError::BadMagic);
    }
    if u16::from_le_bytes([payload[4], payload[5]]) != VERSION {
        return Err(HeaderError::BadVersion);
    }
    let stored = u32::from_le_bytes(payload[88..92].try_into().unwrap());
    if crc32(&payload[..CHECKED_LEN]) != stored {
        return Err(HeaderError::BadChecksum);
    }
    let key_size = KeySize::from_code(payload[6]).ok_or(HeaderError::BadKeySize)?;
    let mut master_key_material = [0u8; MASTER_KEY_MATERIAL_LEN];
    master_key_material.copy_from_slice(&payload[24..88]);
    let h = VolumeHeader {
        key_size,
        flags: payload[7],
        data_offset: u64::from_le_bytes(payload[8..16].try_into().unwrap()),
        data_size: u64::from_le_bytes(payload[16..24].try_into().unwrap()),
        master_key_material,
    };
    if !h.geometry_ok() {
        return Err(HeaderError::BadGeometry);
    }
    Ok(h)
}

fn header_keys(password: &[u8], salt: &[u8], iterations: u32) -> Option<XtsKeys> {
    let params = KdfParams::new(salt, iterations, 64).ok()?;
    let mut derived = pbkdf2_hmac_sha256(password, &params);
    let keys = XtsKeys::from_material(KeySize::Aes256, &derived);
    derived.zeroize();
    Some(keys)
}

/// Encrypts `h` into a fresh 4096-byte slot: new salt, new fill.
pub fn seal_header_slot<R: RngCore + CryptoRng>(
    h: &VolumeHeader,
    password: &[u8],
    iterations: u32,
    rng: &mut R,
) -> Result<[u8; HEADER_SLOT_LEN], HeaderError> {
    let mut slot = [0u8; HEADER_SLOT_LEN];
    rng.fill_bytes(&mut slot);
    let keys = header_keys(password, &slot[..SALT_LEN], iterations)
        .ok_or(HeaderError::FieldOutOfRange)?;
    let mut payload: Sector = serialize_header(h, rng)?;
    keys.encrypt_sector_in_place(SectorIndex(0), &mut payload);
    slot[PAYLOAD_OFFSET..PAYLOAD_OFFSET + HEADER_PAYLOAD_LEN].copy_from_slice(&payload);
    Ok(slot)
}

pub fn open_header_slot(
    slot: &[u8; HEADER_SLOT_LEN],
    password: &[u8],
    iterations: u32,
) -> Result<VolumeHeader, AuthFail> {
    let keys = header_keys(password, &slot[..SALT_LEN], iterations).ok_or(AuthFail)?;
    let mut payload: Sector = slot[PAYLOAD_OFFSET..PAYLOAD_OFFSET + HEADER_PAYLOAD_LEN]
        .try_into()
        .unwrap();
    keys.decrypt_sector_in_place(SectorIndex(0), &mut payload);
    let parsed = parse_header(&payload).map_err(|_| AuthFail);
    payload.zeroize();
    parsed
}
