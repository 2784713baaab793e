//! Descriptor file formats.
//!
//! Binary layout (all integers little-endian):
//!
//! | field    | size            | value                                 |
//! |----------|-----------------|---------------------------------------|
//! | magic    | 4               | `ISCD`                                |
//! | version  | u16             | 1                                     |
//! | dim      | u16             |                                       |
//! | count    | u64             |                                       |
//! | role     | u8              | 0 query, 1 reference, 2 training      |
//! | reserved | 7               | zero                                  |
//! | ids      | count × (u16 + bytes) | UTF-8, length prefixed          |
//! | values   | count × dim × 4 | IEEE-754 `f32`, row-major             |
//!
//! The CSV variant has a header `id,v0,...,v{d-1}` and carries no role.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::descriptor::{DescriptorSet, Role};
use crate::error::{Error, FormatError, Result};

pub const MAGIC: [u8; 4] = *b"ISCD";
pub const VERSION: u16 = 1;
const HEADER_LEN: usize = 24;

/// Options applied when loading a descriptor set.
#[derive(Debug, Clone, Copy)]
pub struct LoadOptions {
    /// Reject sets containing an all-zero vector.
    pub reject_zero: bool,
}

impl Default for LoadOptions {
    fn default() -> Self {
        Self { reject_zero: true }
    }
}

pub fn write_binary<W: Write>(set: &DescriptorSet<f32>, mut w: W) -> Result<()> {
    let dim = u16::try_from(set.dim()).map_err(|_| FormatError::DimOverflow(set.dim()))?;
    let mut header = [0u8; HEADER_LEN];
    header[0..4].copy_from_slice(&MAGIC);
    header[4..6].copy_from_slice(&VERSION.to_le_bytes());
    header[6..8].copy_from_slice(&dim.to_le_bytes());
    header[8..16].copy_from_slice(&(set.len() as u64).to_le_bytes());
    header[16] = set.role().to_byte();
    w.write_all(&header)?;
    for id in set.ids() {
        let len = u16::try_from(id.len()).map_err(|_| FormatError::IdTooLong(id.len()))?;
        w.write_all(&len.to_le_bytes())?;
        w.write_all(id.as_bytes())?;
    }
    let mut buf = Vec::with_capacity(set.as_flat().len() * 4);
    for v in set.as_flat() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)?;
    w.flush()?;
    Ok(())
}

/// Decodes a binary descriptor file from a byte slice.
pub fn decode_binary(bytes: &[u8], opts: LoadOptions) -> Result<DescriptorSet<f32>> {
    let mut cur = Cursor { bytes, pos: 0 };
    let header = cur.take(HEADER_LEN, "header")?;
    let magic: [u8; 4] = header[0..4].try_into().expect("4 bytes");
    if magic != MAGIC {
        return Err(FormatError::BadMagic(magic).into());
    }
    let version = u16::from_le_bytes([header[4], header[5]]);
    if version != VERSION {
        return Err(FormatError::UnsupportedVersion(version).into());
    }
    let dim = u16::from_le_bytes([header[6], header[7]]) as usize;
    let count = u64::from_le_bytes(header[8..16].try_into().expect("8 bytes"));
    let role = Role::from_byte(header[16]).ok_or(FormatError::InvalidRole(header[16]))?;
    if header[17..24].iter().any(|b| *b != 0) {
        return Err(FormatError::Reserved.into());
    }

    // Each id needs at least its 2-byte prefix; bound the allocation before trusting `count`.
    if count.saturating_mul(2) > (bytes.len() - HEADER_LEN) as u64 {
        return Err(FormatError::Truncated("ids").into());
    }
    let mut ids = Vec::with_capacity(count as usize);
    for i in 0..count {
        let len = cur.take(2, "id length")?;
        let len = u16::from_le_bytes([len[0], len[1]]) as usize;
        let raw = cur.take(len, "id bytes")?;
        let id = std::str::from_utf8(raw).map_err(|_| FormatError::InvalidUtf8(i))?;
        ids.push(id.to_owned());
    }
    let n_values = (count as usize)
        .checked_mul(dim)
        .ok_or(FormatError::Truncated("values"))?;
    let raw = cur.take(
        n_values.checked_mul(4).ok_or(FormatError::Truncated("values"))?,
        "values",
    )?;
    let data: Vec<f32> = raw
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    let rest = bytes.len() - cur.pos;
    if rest != 0 {
        return Err(FormatError::TrailingBytes(rest as u64).into());
    }
    let set = DescriptorSet::from_parts(role, dim, ids, data)?;
    if opts.reject_zero {
        set.reject_zero_vectors()?;
    }
    Ok(set)
}

pub fn read_binary<R: Read>(mut r: R, opts: LoadOptions) -> Result<DescriptorSet<f32>> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    decode_binary(&bytes, opts)
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize, what: &'static str) -> Result<&'a [u8], FormatError> {
        let end = self.pos.checked_add(n).ok_or(FormatError::Truncated(what))?;
        let out = self.bytes.get(self.pos..end).ok_or(FormatError::Truncated(what))?;
        self.pos = end;
        Ok(out)
    }
}

pub fn write_csv<W: Write>(set: &DescriptorSet<f32>, w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    let mut header = vec!["id".to_string()];
    header.extend((0..set.dim()).map(|i| format!("v{i}")));
    wr.write_record(&header).map_err(csv_err)?;
    for (id, v) in set.iter() {
        let mut rec = Vec::with_capacity(set.dim() + 1);
        rec.push(id.to_string());
        // Display for f32 prints the shortest string that round-trips.
        rec.extend(v.iter().map(|x| x.to_string()));
        wr.write_record(&rec).map_err(csv_err)?;
    }
    wr.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(r: R, role: Role, opts: LoadOptions) -> Result<DescriptorSet<f32>> {
    let mut rd = csv::Reader::from_reader(r);
    let header = rd.headers().map_err(csv_err)?.clone();
    let dim = header.len().saturating_sub(1);
    if header.get(0) != Some("id") || (0..dim).any(|i| header.get(i + 1) != Some(&format!("v{i}")[..])) {
        return Err(FormatError::Csv {
            line: 1,
            msg: "expected header id,v0,...".into(),
        }
        .into());
    }
    let mut ids = Vec::new();
    let mut data = Vec::new();
    for rec in rd.records() {
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != dim + 1 {
            return Err(FormatError::Csv {
                line,
                msg: format!("expected {} fields, found {}", dim + 1, rec.len()),
            }
            .into());
        }
        ids.push(rec[0].to_string());
        for field in rec.iter().skip(1) {
            let v: f32 = field.trim().parse().map_err(|_| FormatError::Csv {
                line,
                msg: format!("not a number: {field:?}"),
            })?;
            data.push(v);
        }
    }
    let set = DescriptorSet::from_parts(role, dim, ids, data)?;
    if opts.reject_zero {
        set.reject_zero_vectors()?;
    }
    Ok(set)
}

fn csv_err(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(io) => FormatError::Io(io).into(),
        other => FormatError::Csv {
            line,
            msg: format!("{other:?}"),
        }
        .into(),
    }
}

fn is_csv(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

/// Reads a descriptor file, choosing the format from the extension
/// (`.csv` is CSV, anything else binary). CSV files take `csv_role`.
pub fn read_descriptors(
    path: impl AsRef<Path>,
    csv_role: Role,
    opts: LoadOptions,
) -> Result<DescriptorSet<f32>> {
    let path = path.as_ref();
    let file = BufReader::new(File::open(path)?);
    if is_csv(path) {
        read_csv(file, csv_role, opts)
    } else {
        read_binary(file, opts)
    }
}

pub fn write_descriptors(set: &DescriptorSet<f32>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = BufWriter::new(File::create(path)?);
    if is_csv(path) {
        write_csv(set, file)
    } else {
        write_binary(set, file)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> DescriptorSet<f32> {
        DescriptorSet::from_parts(
            Role::Training,
            3,
            vec!["img_0".into(), "ünï,cöde".into()],
            vec![1.0, -0.5, 1e-30, 0.1, 0.2, -3.4e38],
        )
        .unwrap()
    }

    fn encode(set: &DescriptorSet<f32>) -> Vec<u8> {
        let mut buf = Vec::new();
        write_binary(set, &mut buf).unwrap();
        buf
    }

    #[test]
    fn binary_layout() {
        let buf = encode(&sample());
        assert_eq!(&buf[0..4], b"ISCD");
        assert_eq!(u16::from_le_bytes([buf[4], buf[5]]), 1);
        assert_eq!(u16::from_le_bytes([buf[6], buf[7]]), 3);
        assert_eq!(u64::from_le_bytes(buf[8..16].try_into().unwrap()), 2);
        assert_eq!(buf[16], 2);
        assert_eq!(&buf[17..24], &[0u8; 7]);
        assert_eq!(u16::from_le_bytes([buf[24], buf[25]]), 5);
        assert_eq!(&buf[26..31], b"img_0");
        let values_at = buf.len() - 6 * 4;
        assert_eq!(&buf[values_at..values_at + 4], &1.0f32.to_le_bytes());
    }

    #[test]
    fn binary_roundtrip() {
        let set = sample();
        let back = decode_binary(&encode(&set), LoadOptions::default()).unwrap();
        assert_eq!(back, set);
    }

    #[test]
    fn binary_errors() {
        let good = encode(&sample());

        let mut bad = good.clone();
        bad[0] = b'X';
        assert!(matches!(
            decode_binary(&bad, LoadOptions::default()),
            Err(Error::Format(FormatError::BadMagic(_)))
        ));

        let mut bad = good.clone();
        bad[4] = 2;
        assert!(matches!(
            decode_binary(&bad, LoadOptions::default()),
            Err(Error::Format(FormatError::UnsupportedVersion(2)))
        ));

        for cut in [3, 20, 30, good.len() - 1] {
            assert!(matches!(
                decode_binary(&good[..cut], LoadOptions::default()),
                Err(Error::Format(FormatError::Truncated(_)))
            ));
        }

        let mut bad = good.clone();
        bad[16] = 9;
        assert!(matches!(
            decode_binary(&bad, LoadOptions::default()),
            Err(Error::Format(FormatError::InvalidRole(9)))
        ));

        let mut bad = good.clone();
        bad.push(0);
        assert!(matches!(
            decode_binary(&bad, LoadOptions::default()),
            Err(Error::Format(FormatError::TrailingBytes(1)))
        ));

        // Second id rewritten to equal the first (same byte length).
        let dup = DescriptorSet::from_parts(
            Role::Query,
            1,
            vec!["aa".into(), "ab".into()],
            vec![1.0f32, 2.0],
        )
        .unwrap();
        let mut bad = encode(&dup);
        let pos = bad.windows(2).rposition(|w| w == b"ab").unwrap();
        bad[pos + 1] = b'a';
        assert!(matches!(
            decode_binary(&bad, LoadOptions::default()),
            Err(Error::DuplicateId(id)) if id == "aa"
        ));
    }

    #[test]
    fn zero_vectors_rejected_unless_allowed() {
        let set = DescriptorSet::from_parts(Role::Query, 2, vec!["z".into()], vec![0.0f32, 0.0]).unwrap();
        let buf = encode(&set);
        assert!(matches!(
            decode_binary(&buf, LoadOptions::default()),
            Err(Error::ZeroVector(_))
        ));
        assert!(decode_binary(&buf, LoadOptions { reject_zero: false }).is_ok());
    }

    #[test]
    fn csv_roundtrip_and_errors() {
        let set = sample();
        let mut buf = Vec::new();
        write_csv(&set, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("id,v0,v1,v2\n"));
        let back = read_csv(&buf[..], Role::Training, LoadOptions::default()).unwrap();
        assert_eq!(back, set);

        let dup = "id,v0\na,1\na,2\n";
        assert!(matches!(
            read_csv(dup.as_bytes(), Role::Query, LoadOptions::default()),
            Err(Error::DuplicateId(_))
        ));
        let nan = "id,v0\na,abc\n";
        assert!(matches!(
            read_csv(nan.as_bytes(), Role::Query, LoadOptions::default()),
            Err(Error::Format(FormatError::Csv { .. }))
        ));
        let header = "name,v0\na,1\n";
        assert!(read_csv(header.as_bytes(), Role::Query, LoadOptions::default()).is_err());
    }

    #[test]
    fn path_dispatch() {
        let dir = tempfile::tempdir().unwrap();
        let set = sample();
        for name in ["d.iscd", "d.csv"] {
            let p = dir.path().join(name);
            write_descriptors(&set, &p).unwrap();
            let back = read_descriptors(&p, Role::Training, LoadOptions::default()).unwrap();
            assert_eq!(back, set);
        }
    }
}
