//! Flat named-file catalog inside a mounted volume.
//!
//! Logical sector 0 holds the superblock, sectors 1..=128 one catalog entry
//! each, and file data starts at sector 129. Files occupy contiguous
//! extents chosen first-fit; there is no defragmentation, so `NoSpace` can
//! occur while enough scattered free space remains. Deleting a file clears
//! its entry only, and its sectors keep their (encrypted) contents.
//!
//! All I/O goes through [`MountHandle::read_sector`] and
//! [`MountHandle::write_sector`].

use crate::error::{Error, Result};
use crate::format::crc32;
use crate::sector::{SectorIndex, SECTOR_SIZE};
use crate::volume::MountHandle;

pub const CATALOG_SECTORS: u64 = 128;
pub const FIRST_DATA_SECTOR: u64 = 1 + CATALOG_SECTORS;
/// Superblock, catalog, and at least one data sector.
pub const MIN_SECTORS: u64 = FIRST_DATA_SECTOR + 1;
pub const MAX_FILES: usize = CATALOG_SECTORS as usize;
pub const MAX_NAME_LEN: usize = 255;

const MAGIC: [u8; 4] = *b"DTFS";
const VERSION: u16 = 1;
const SECTOR: u64 = SECTOR_SIZE as u64;

/// One in-use catalog record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CatalogEntry {
    pub name: Vec<u8>,
    pub start_sector: u64,
    pub byte_length: u64,
    pub content_crc32: u32,
}

impl CatalogEntry {
    pub fn sector_len(&self) -> u64 {
        self.byte_length.div_ceil(SECTOR)
    }

    fn encode(&self) -> [u8; SECTOR_SIZE] {
        let mut s = [0u8; SECTOR_SIZE];
        s[0] = 1;
        s[1..3].copy_from_slice(&(self.name.len() as u16).to_le_bytes());
        s[3..3 + self.name.len()].copy_from_slice(&self.name);
        s[258..266].copy_from_slice(&self.start_sector.to_le_bytes());
        s[266..274].copy_from_slice(&self.byte_length.to_le_bytes());
        s[274..278].copy_from_slice(&self.content_crc32.to_le_bytes());
        s
    }

    fn decode(s: &[u8; SECTOR_SIZE]) -> Result<Option<Self>> {
        match s[0] {
            0 => return Ok(None),
            1 => {}
            _ => return Err(Error::CorruptData),
        }
        let name_len = u16::from_le_bytes([s[1], s[2]]) as usize;
        if name_len == 0 || name_len > MAX_NAME_LEN {
            return Err(Error::CorruptData);
        }
        Ok(Some(CatalogEntry {
            name: s[3..3 + name_len].to_vec(),
            start_sector: u64::from_le_bytes(s[258..266].try_into().unwrap()),
            byte_length: u64::from_le_bytes(s[266..274].try_into().unwrap()),
            content_crc32: u32::from_le_bytes(s[274..278].try_into().unwrap()),
        }))
    }
}

fn superblock(file_count: u32) -> [u8; SECTOR_SIZE] {
    let mut s = [0u8; SECTOR_SIZE];
    s[0..4].copy_from_slice(&MAGIC);
    s[4..6].copy_from_slice(&VERSION.to_le_bytes());
    s[6..8].copy_from_slice(&(CATALOG_SECTORS as u16).to_le_bytes());
    s[8..12].copy_from_slice(&file_count.to_le_bytes());
    s
}

fn check_superblock(h: &MountHandle) -> Result<()> {
    let s = h.read_sector(SectorIndex(0))?;
    let ok = s[0..4] == MAGIC
        && u16::from_le_bytes([s[4], s[5]]) == VERSION
        && u16::from_le_bytes([s[6], s[7]]) as u64 == CATALOG_SECTORS
        && u32::from_le_bytes(s[8..12].try_into().unwrap()) as usize <= MAX_FILES
        && h.sector_count() >= MIN_SECTORS;
    if ok {
        Ok(())
    } else {
        Err(Error::BadSuperblock)
    }
}

/// Catalog slots in order, `None` for free ones.
fn load_catalog(h: &MountHandle) -> Result<Vec<Option<CatalogEntry>>> {
    check_superblock(h)?;
    (0..CATALOG_SECTORS)
        .map(|i| CatalogEntry::decode(&h.read_sector(SectorIndex(1 + i))?))
        .collect()
}

fn write_count(h: &mut MountHandle, catalog: &[Option<CatalogEntry>]) -> Result<()> {
    let count = catalog.iter().flatten().count() as u32;
    h.write_sector(SectorIndex(0), &superblock(count))
}

fn validate_name(name: &[u8]) -> Result<()> {
    if name.is_empty() {
        return Err(Error::InvalidName);
    }
    if name.len() > MAX_NAME_LEN {
        return Err(Error::NameTooLong);
    }
    Ok(())
}

/// Lowest start sector with `need` free sectors after it.
fn first_fit(catalog: &[Option<CatalogEntry>], need: u64, sector_count: u64) -> Option<u64> {
    let mut extents: Vec<(u64, u64)> = catalog
        .iter()
        .flatten()
        .filter(|e| e.sector_len() > 0)
        .map(|e| (e.start_sector, e.start_sector + e.sector_len()))
        .collect();
    extents.sort_unstable();
    let mut candidate = FIRST_DATA_SECTOR;
    for (start, end) in extents {
        if candidate + need <= start {
            break;
        }
        candidate = candidate.max(end);
    }
    (candidate + need <= sector_count).then_some(candidate)
}

/// Writes a fresh superblock and clears every catalog entry.
pub fn format(h: &mut MountHandle) -> Result<()> {
    if h.sector_count() < MIN_SECTORS {
        return Err(Error::VolumeTooSmall {
            sectors: h.sector_count(),
            needed: MIN_SECTORS,
        });
    }
    h.check_writable(0..FIRST_DATA_SECTOR)?;
    h.write_sector(SectorIndex(0), &superblock(0))?;
    let empty = [0u8; SECTOR_SIZE];
    for i in 1..FIRST_DATA_SECTOR {
        h.write_sector(SectorIndex(i), &empty)?;
    }
    Ok(())
}

/// Stores `content` under `name`. Data sectors are written before the
/// catalog entry, and the superblock count last.
pub fn put_file(h: &mut MountHandle, name: &[u8], content: &[u8]) -> Result<()> {
    validate_name(name)?;
    let mut catalog = load_catalog(h)?;
    if catalog.iter().flatten().any(|e| e.name == name) {
        return Err(Error::NameExists);
    }
    let slot = catalog
        .iter()
        .position(Option::is_none)
        .ok_or(Error::CatalogFull)?;
    let need = (content.len() as u64).div_ceil(SECTOR);
    let start = if need == 0 {
        FIRST_DATA_SECTOR
    } else {
        first_fit(&catalog, need, h.sector_count()).ok_or(Error::NoSpace)?
    };
    h.check_writable(start..start + need)?;

    for (i, chunk) in content.chunks(SECTOR_SIZE).enumerate() {
        let mut sector = [0u8; SECTOR_SIZE];
        sector[..chunk.len()].copy_from_slice(chunk);
        h.write_sector(SectorIndex(start + i as u64), &sector)?;
    }
    let entry = CatalogEntry {
        name: name.to_vec(),
        start_sector: start,
        byte_length: content.len() as u64,
        content_crc32: crc32(content),
    };
    h.write_sector(SectorIndex(1 + slot as u64), &entry.encode())?;
    catalog[slot] = Some(entry);
    write_count(h, &catalog)
}

/// Reads a file back and verifies its checksum.
pub fn get_file(h: &MountHandle, name: &[u8]) -> Result<Vec<u8>> {
    let catalog = load_catalog(h)?;
    let entry = catalog
        .iter()
        .flatten()
        .find(|e| e.name == name)
        .ok_or(Error::NotFound)?;
    let sectors = entry.sector_len();
    if sectors > 0
        && (entry.start_sector < FIRST_DATA_SECTOR
            || entry.start_sector.saturating_add(sectors) > h.sector_count())
    {
        return Err(Error::CorruptData);
    }
    let mut out = Vec::with_capacity(entry.byte_length as usize);
    for i in 0..sectors {
        out.extend_from_slice(&h.read_sector(SectorIndex(entry.start_sector + i))?);
    }
    out.truncate(entry.byte_length as usize);
    if crc32(&out) != entry.content_crc32 {
        return Err(Error::CorruptData);
    }
    Ok(out)
}

/// `(name, byte_length)` for every in-use entry, in catalog order.
pub fn list_files(h: &MountHandle) -> Result<Vec<(Vec<u8>, u64)>> {
    Ok(load_catalog(h)?
        .into_iter()
        .flatten()
        .map(|e| (e.name, e.byte_length))
        .collect())
}

/// Full catalog records, in catalog order.
pub fn entries(h: &MountHandle) -> Result<Vec<CatalogEntry>> {
    Ok(load_catalog(h)?.into_iter().flatten().collect())
}

/// Clears the entry. The file's data sectors are not wiped.
pub fn delete_file(h: &mut MountHandle, name: &[u8]) -> Result<()> {
    let mut catalog = load_catalog(h)?;
    let slot = catalog
        .iter()
        .position(|e| e.as_ref().is_some_and(|e| e.name == name))
        .ok_or(Error::NotFound)?;
    h.write_sector(SectorIndex(1 + slot as u64), &[0u8; SECTOR_SIZE])?;
    catalog[slot] = None;
    write_count(h, &catalog)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::volume::{create_volume, mount, CreateOptions};
    use rand::rngs::StdRng;
    use rand::{RngCore, SeedableRng};

    fn volume(size: u64) -> (tempfile::TempDir, MountHandle) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("v");
        create_volume(
            &path,
            &CreateOptions::new(size, "pw").iterations(1),
            &mut StdRng::seed_from_u64(3),
        )
        .unwrap();
        let h = mount(&path, b"pw", 1, None).unwrap();
        (dir, h)
    }

    #[test]
    fn fresh_and_reformatted_volumes_are_empty() {
        let (_d, mut h) = volume(1 << 20);
        assert!(list_files(&h).unwrap().is_empty());
        put_file(&mut h, b"a", b"hello").unwrap();
        assert_eq!(list_files(&h).unwrap(), vec![(b"a".to_vec(), 5)]);
        format(&mut h).unwrap();
        assert!(list_files(&h).unwrap().is_empty());
        format(&mut h).unwrap();
        assert!(list_files(&h).unwrap().is_empty());
    }

    #[test]
    fn name_rules() {
        let (_d, mut h) = volume(1 << 20);
        assert!(matches!(put_file(&mut h, b"", b"x"), Err(Error::InvalidName)));
        assert!(matches!(put_file(&mut h, &[b'n'; 256], b"x"), Err(Error::NameTooLong)));
        put_file(&mut h, &[b'n'; 255], b"x").unwrap();
        assert!(matches!(put_file(&mut h, &[b'n'; 255], b"y"), Err(Error::NameExists)));
        // Raw bytes, no path semantics.
        put_file(&mut h, b"dir/\xff\x00name", b"z").unwrap();
        assert_eq!(get_file(&h, b"dir/\xff\x00name").unwrap(), b"z");
    }

    #[test]
    fn empty_file_uses_no_sectors() {
        let (_d, mut h) = volume(1 << 20);
        put_file(&mut h, b"empty", b"").unwrap();
        put_file(&mut h, b"one", b"1").unwrap();
        let e = entries(&h).unwrap();
        assert_eq!(e[0].sector_len(), 0);
        assert_eq!(e[1].start_sector, FIRST_DATA_SECTOR);
        assert_eq!(get_file(&h, b"empty").unwrap(), b"");
    }

    #[test]
    fn boundary_sizes_round_trip() {
        let (_d, mut h) = volume(1 << 20);
        let mut rng = StdRng::seed_from_u64(4);
        for len in [1usize, 511, 512, 513, 1024, 100_000] {
            let mut data = vec![0u8; len];
            rng.fill_bytes(&mut data);
            let name = format!("f{len}");
            put_file(&mut h, name.as_bytes(), &data).unwrap();
            assert_eq!(get_file(&h, name.as_bytes()).unwrap(), data);
        }
    }

    #[test]
    fn space_accounting() {
        let (_d, mut h) = volume(1 << 20);
        let capacity = (h.sector_count() - FIRST_DATA_SECTOR) as usize * SECTOR_SIZE;
        put_file(&mut h, b"big", &vec![1u8; capacity]).unwrap();
        assert!(matches!(put_file(&mut h, b"more", b"x"), Err(Error::NoSpace)));
        put_file(&mut h, b"zero", b"").unwrap();
        delete_file(&mut h, b"big").unwrap();
        assert!(matches!(delete_file(&mut h, b"big"), Err(Error::NotFound)));
        put_file(&mut h, b"big", &vec![2u8; capacity]).unwrap();
        assert!(matches!(get_file(&h, b"nope"), Err(Error::NotFound)));
    }

    #[test]
    fn first_fit_reuses_holes() {
        let (_d, mut h) = volume(1 << 20);
        put_file(&mut h, b"a", &[1u8; 1024]).unwrap();
        put_file(&mut h, b"b", &[2u8; 512]).unwrap();
        put_file(&mut h, b"c", &[3u8; 512]).unwrap();
        delete_file(&mut h, b"a").unwrap();
        put_file(&mut h, b"d", &[4u8; 512]).unwrap();
        put_file(&mut h, b"e", &[5u8; 1024]).unwrap();
        let by_name = |n: &[u8]| entries(&h).unwrap().into_iter().find(|e| e.name == n).unwrap();
        assert_eq!(by_name(b"d").start_sector, FIRST_DATA_SECTOR);
        assert_eq!(by_name(b"e").start_sector, FIRST_DATA_SECTOR + 4);
        assert_eq!(get_file(&h, b"c").unwrap(), vec![3u8; 512]);
    }

    #[test]
    fn catalog_capacity() {
        let (_d, mut h) = volume(1 << 20);
        for i in 0..MAX_FILES {
            put_file(&mut h, format!("{i}").as_bytes(), b"").unwrap();
        }
        assert!(matches!(put_file(&mut h, b"overflow", b""), Err(Error::CatalogFull)));
        assert_eq!(list_files(&h).unwrap().len(), MAX_FILES);
    }

    #[test]
    fn damaged_superblock_detected() {
        let (_d, mut h) = volume(1 << 20);
        h.write_sector(SectorIndex(0), &[0u8; SECTOR_SIZE]).unwrap();
        assert!(matches!(list_files(&h), Err(Error::BadSuperblock)));
        assert!(matches!(put_file(&mut h, b"x", b"y"), Err(Error::BadSuperblock)));
    }

    #[test]
    fn corrupted_data_detected() {
        let (_d, mut h) = volume(1 << 20);
        put_file(&mut h, b"f", &[9u8; 2000]).unwrap();
        let start = entries(&h).unwrap()[0].start_sector;
        let mut s = h.read_sector(SectorIndex(start + 1)).unwrap();
        s[3] ^= 1;
        h.write_sector(SectorIndex(start + 1), &s).unwrap();
        assert!(matches!(get_file(&h, b"f"), Err(Error::CorruptData)));
    }
}
