//! Deniable encrypted container volumes.
//!
//! A container file holds an outer volume and, optionally, a hidden volume
//! in the outer volume's tail. Each volume is unlocked by its own password:
//! the password opens a header slot, the header carries the volume's master
//! keys, and every 512-byte sector is encrypted with XTS-AES under those
//! keys. A minimal file catalog inside each volume stores named files.
//!
//! Everything cryptographic is implemented here from scratch (AES, XTS,
//! SHA-256, HMAC, PBKDF2, CRC-32) with no constant-time guarantees.

pub mod aes;
pub mod bench;
pub mod error;
pub mod filestore;
pub mod format;
pub mod kdf;
pub mod sector;
pub mod volume;

pub use aes::{decrypt_block, encrypt_block, expand_key, Block, KeySchedule, KeySize};
pub use error::{Error, Result};
pub use format::{crc32, AuthFail, VolumeHeader};
pub use sector::{decrypt_sector, encrypt_sector, Sector, SectorIndex, XtsKeys, SECTOR_SIZE};
pub use volume::{create_volume, mount, CreateOptions, HiddenSpec, MountHandle, VolumeKind};
