//! Container lifecycle: create, mount, sector I/O, close.
//!
//! The outer volume always claims the whole data region, even when a hidden
//! volume lives in its tail. Without protection, writes through the outer
//! volume can destroy hidden data. Mounting the outer volume with the hidden
//! password as `protect_password` arms a guard that refuses such writes.

use std::fs::{File, OpenOptions};
use std::io::{Read, Seek, SeekFrom, Write};
use std::ops::Range;
use std::path::Path;

use rand::{CryptoRng, RngCore};

use crate::aes::KeySize;
use crate::error::{Error, Result};
use crate::filestore;
use crate::format::{
    open_header_slot, seal_header_slot, ContainerLayout, VolumeHeader, DATA_REGION_OFFSET,
    HEADER_SLOT_LEN, HIDDEN_SLOT_OFFSET, OUTER_SLOT_OFFSET,
};
use crate::kdf::DEFAULT_ITERATIONS;
use crate::sector::{Sector, SectorIndex, XtsKeys, SECTOR_SIZE};

const SECTOR: u64 = SECTOR_SIZE as u64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VolumeKind {
    Outer,
    Hidden,
}

impl std::fmt::Display for VolumeKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            VolumeKind::Outer => "outer",
            VolumeKind::Hidden => "hidden",
        })
    }
}

/// Size and password of a hidden volume placed at the end of the container.
#[derive(Clone)]
pub struct HiddenSpec {
    pub size: u64,
    pub password: Vec<u8>,
}

#[derive(Clone)]
pub struct CreateOptions {
    pub total_size: u64,
    pub outer_password: Vec<u8>,
    pub key_size: KeySize,
    pub hidden: Option<HiddenSpec>,
    pub iterations: u32,
}

impl CreateOptions {
    /// AES-256, no hidden volume, default KDF cost.
    pub fn new(total_size: u64, outer_password: impl Into<Vec<u8>>) -> Self {
        CreateOptions {
            total_size,
            outer_password: outer_password.into(),
            key_size: KeySize::Aes256,
            hidden: None,
            iterations: DEFAULT_ITERATIONS,
        }
    }

    pub fn key_size(mut self, key_size: KeySize) -> Self {
        self.key_size = key_size;
        self
    }

    pub fn hidden(mut self, size: u64, password: impl Into<Vec<u8>>) -> Self {
        self.hidden = Some(HiddenSpec {
            size,
            password: password.into(),
        });
        self
    }

    pub fn iterations(mut self, iterations: u32) -> Self {
        self.iterations = iterations;
        self
    }
}

/// Writes a new container at `path`, which must not already exist.
///
/// Every byte is first filled from `rng`; then the header slots are sealed
/// and both file stores formatted. The outer header always describes the
/// full data region.
pub fn create_volume<R: RngCore + CryptoRng>(
    path: impl AsRef<Path>,
    opts: &CreateOptions,
    rng: &mut R,
) -> Result<()> {
    let layout = ContainerLayout::new(opts.total_size)
        .map_err(|_| Error::BadGeometry("container size must be 8192 + a positive multiple of 512"))?;
    if opts.iterations == 0 {
        return Err(Error::BadGeometry("iteration count must be at least 1"));
    }
    let outer_sectors = layout.data_size() / SECTOR;
    if outer_sectors < filestore::MIN_SECTORS {
        return Err(Error::VolumeTooSmall {
            sectors: outer_sectors,
            needed: filestore::MIN_SECTORS,
        });
    }
    if let Some(hidden) = &opts.hidden {
        validate_hidden(&layout, hidden, &opts.outer_password)?;
    }

    let mut file = OpenOptions::new()
        .read(true)
        .write(true)
        .create_new(true)
        .open(path.as_ref())?;

    let mut chunk = vec![0u8; 1 << 20];
    let mut remaining = opts.total_size;
    while remaining > 0 {
        let n = remaining.min(chunk.len() as u64) as usize;
        rng.fill_bytes(&mut chunk[..n]);
        file.write_all(&chunk[..n])?;
        remaining -= n as u64;
    }

    let outer = VolumeHeader::generate(
        opts.key_size,
        false,
        layout.data_offset(),
        layout.data_size(),
        rng,
    );
    write_slot(&mut file, OUTER_SLOT_OFFSET, &outer, &opts.outer_password, opts.iterations, rng)?;

    let hidden = match &opts.hidden {
        Some(spec) => {
            let h = VolumeHeader::generate(
                opts.key_size,
                true,
                opts.total_size - spec.size,
                spec.size,
                rng,
            );
            write_slot(&mut file, HIDDEN_SLOT_OFFSET, &h, &spec.password, opts.iterations, rng)?;
            Some(h)
        }
        None => None,
    };

    let mut handle = MountHandle::from_header(file.try_clone()?, VolumeKind::Outer, &outer, None);
    filestore::format(&mut handle)?;
    handle.close()?;
    if let Some(h) = &hidden {
        let mut handle = MountHandle::from_header(file.try_clone()?, VolumeKind::Hidden, h, None);
        filestore::format(&mut handle)?;
        handle.close()?;
    }
    file.sync_all()?;
    Ok(())
}

fn validate_hidden(layout: &ContainerLayout, hidden: &HiddenSpec, outer_password: &[u8]) -> Result<()> {
    if hidden.password == outer_password {
        return Err(Error::PasswordsEqual);
    }
    if hidden.size < SECTOR || !hidden.size.is_multiple_of(SECTOR) {
        return Err(Error::BadGeometry("hidden size must be a positive multiple of 512"));
    }
    if hidden.size > layout.data_size() {
        return Err(Error::BadGeometry("hidden volume larger than the data region"));
    }
    // The outer file store's superblock and catalog occupy the first sectors
    // of the data region and are written at creation.
    let outer_metadata_end = layout.data_offset() + filestore::FIRST_DATA_SECTOR * SECTOR;
    if layout.size() - hidden.size < outer_metadata_end {
        return Err(Error::BadGeometry("hidden volume would overlap the outer file catalog"));
    }
    let hidden_sectors = hidden.size / SECTOR;
    if hidden_sectors < filestore::MIN_SECTORS {
        return Err(Error::VolumeTooSmall {
            sectors: hidden_sectors,
            needed: filestore::MIN_SECTORS,
        });
    }
    Ok(())
}

fn write_slot<R: RngCore + CryptoRng>(
    file: &mut File,
    offset: u64,
    header: &VolumeHeader,
    password: &[u8],
    iterations: u32,
    rng: &mut R,
) -> Result<()> {
    let slot = seal_header_slot(header, password, iterations, rng)
        .map_err(|_| Error::BadGeometry("header fields out of range"))?;
    file.seek(SeekFrom::Start(offset))?;
    file.write_all(&slot)?;
    Ok(())
}

fn read_slot(file: &mut File, offset: u64) -> Result<[u8; HEADER_SLOT_LEN]> {
    let mut slot = [0u8; HEADER_SLOT_LEN];
    file.seek(SeekFrom::Start(offset))?;
    file.read_exact(&mut slot)?;
    Ok(slot)
}

/// Authenticates against the outer slot, then the hidden slot.
///
/// `protect_password`, when given for an outer mount, must open the hidden
/// slot; sectors from the hidden volume's start to the end of the outer
/// volume then refuse writes.
pub fn mount(
    path: impl AsRef<Path>,
    password: &[u8],
    iterations: u32,
    protect_password: Option<&[u8]>,
) -> Result<MountHandle> {
    let path = path.as_ref();
    let mut file = match OpenOptions::new().read(true).write(true).open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::PermissionDenied => File::open(path)?,
        Err(e) => return Err(e.into()),
    };
    let len = file.metadata()?.len();
    if len < DATA_REGION_OFFSET {
        return Err(Error::AuthFail);
    }
    let outer_slot = read_slot(&mut file, OUTER_SLOT_OFFSET)?;
    let hidden_slot = read_slot(&mut file, HIDDEN_SLOT_OFFSET)?;
    let open = |slot: &[u8; HEADER_SLOT_LEN], pw: &[u8]| {
        open_header_slot(slot, pw, iterations)
            .ok()
            .filter(|h| h.fits(len))
    };

    if let Some(outer) = open(&outer_slot, password) {
        let protected = match protect_password {
            Some(pp) => {
                let hidden = open(&hidden_slot, pp).ok_or(Error::AuthFail)?;
                let outer_sectors = outer.data_size / SECTOR;
                let start = hidden.data_offset.saturating_sub(outer.data_offset) / SECTOR;
                Some(start.min(outer_sectors)..outer_sectors)
            }
            None => None,
        };
        return Ok(MountHandle::from_header(file, VolumeKind::Outer, &outer, protected));
    }
    if let Some(hidden) = open(&hidden_slot, password) {
        return Ok(MountHandle::from_header(file, VolumeKind::Hidden, &hidden, None));
    }
    Err(Error::AuthFail)
}

/// An authenticated session over one volume of a container.
///
/// Single owner; not internally synchronized.
pub struct MountHandle {
    file: Option<File>,
    keys: Option<XtsKeys>,
    kind: VolumeKind,
    key_size: KeySize,
    data_offset: u64,
    data_size: u64,
    protected: Option<Range<u64>>,
}

impl std::fmt::Debug for MountHandle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MountHandle")
            .field("kind", &self.kind)
            .field("key_size", &self.key_size)
            .field("data_offset", &self.data_offset)
            .field("data_size", &self.data_size)
            .field("protected", &self.protected)
            .field("open", &self.file.is_some())
            .finish()
    }
}

impl MountHandle {
    fn from_header(
        file: File,
        kind: VolumeKind,
        header: &VolumeHeader,
        protected: Option<Range<u64>>,
    ) -> Self {
        MountHandle {
            file: Some(file),
            keys: Some(header.master_keys()),
            kind,
            key_size: header.key_size,
            data_offset: header.data_offset,
            data_size: header.data_size,
            protected,
        }
    }

    pub fn kind(&self) -> VolumeKind {
        self.kind
    }

    pub fn key_size(&self) -> KeySize {
        self.key_size
    }

    /// Container-absolute byte offset of logical sector 0.
    pub fn data_offset(&self) -> u64 {
        self.data_offset
    }

    pub fn data_size(&self) -> u64 {
        self.data_size
    }

    pub fn sector_count(&self) -> u64 {
        self.data_size / SECTOR
    }

    /// Logical sectors that refuse writes, if protection is armed.
    pub fn protected_range(&self) -> Option<Range<u64>> {
        self.protected.clone()
    }

    pub fn is_closed(&self) -> bool {
        self.file.is_none()
    }

    fn open_parts(&self) -> Result<(&File, &XtsKeys)> {
        match (&self.file, &self.keys) {
            (Some(f), Some(k)) => Ok((f, k)),
            _ => Err(Error::UseAfterClose),
        }
    }

    fn check_index(&self, idx: u64) -> Result<()> {
        if idx >= self.sector_count() {
            return Err(Error::OutOfRange {
                index: idx,
                count: self.sector_count(),
            });
        }
        Ok(())
    }

    /// Fails unless every sector in `sectors` may be written: in range and
    /// outside any protected range.
    pub fn check_writable(&self, sectors: Range<u64>) -> Result<()> {
        self.open_parts()?;
        if sectors.is_empty() {
            return Ok(());
        }
        self.check_index(sectors.end - 1)?;
        if let Some(p) = &self.protected {
            if sectors.start < p.end && p.start < sectors.end {
                return Err(Error::ProtectedRangeViolation {
                    index: sectors.start.max(p.start),
                });
            }
        }
        Ok(())
    }

    pub fn read_sector(&self, idx: SectorIndex) -> Result<Sector> {
        let (mut file, keys) = self.open_parts()?;
        self.check_index(idx.0)?;
        let mut sector = [0u8; SECTOR_SIZE];
        file.seek(SeekFrom::Start(self.data_offset + idx.0 * SECTOR))?;
        file.read_exact(&mut sector)?;
        keys.decrypt_sector_in_place(idx, &mut sector);
        Ok(sector)
    }

    pub fn write_sector(&mut self, idx: SectorIndex, data: &Sector) -> Result<()> {
        self.check_writable(idx.0..idx.0 + 1)?;
        let (mut file, keys) = self.open_parts()?;
        let mut sector = *data;
        keys.encrypt_sector_in_place(idx, &mut sector);
        file.seek(SeekFrom::Start(self.data_offset + idx.0 * SECTOR))?;
        file.write_all(&sector)?;
        Ok(())
    }

    /// Flushes to disk and drops the key schedules, which zeroize on drop.
    /// Closing twice is a no-op.
    pub fn close(&mut self) -> Result<()> {
        self.keys = None;
        if let Some(file) = self.file.take() {
            file.sync_all()?;
        }
        Ok(())
    }
}
