//! `SCN1` binary array files.
//!
//! Layout: the four magic bytes `SCN1`, one dtype byte (0 = f16, 1 = i8,
//! 2 = u16), the element count as a little-endian `u64`, then the elements
//! in little-endian order. Nothing may follow the last element.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use half::f16;

use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"SCN1";
const HEADER_LEN: usize = 13;

#[derive(Debug, Clone, PartialEq)]
pub enum ArrayData {
    F16(Vec<f16>),
    I8(Vec<i8>),
    U16(Vec<u16>),
}

impl ArrayData {
    pub fn dtype_code(&self) -> u8 {
        match self {
            ArrayData::F16(_) => 0,
            ArrayData::I8(_) => 1,
            ArrayData::U16(_) => 2,
        }
    }

    pub fn dtype_name(&self) -> &'static str {
        match self {
            ArrayData::F16(_) => "f16",
            ArrayData::I8(_) => "i8",
            ArrayData::U16(_) => "u16",
        }
    }

    pub fn len(&self) -> usize {
        match self {
            ArrayData::F16(v) => v.len(),
            ArrayData::I8(v) => v.len(),
            ArrayData::U16(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn elem_size(code: u8) -> Option<usize> {
        match code {
            0 | 2 => Some(2),
            1 => Some(1),
            _ => None,
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + 2 * self.len());
        out.extend_from_slice(MAGIC);
        out.push(self.dtype_code());
        out.extend_from_slice(&(self.len() as u64).to_le_bytes());
        match self {
            ArrayData::F16(v) => v.iter().for_each(|x| out.extend_from_slice(&x.to_le_bytes())),
            ArrayData::I8(v) => out.extend(v.iter().map(|&x| x as u8)),
            ArrayData::U16(v) => v.iter().for_each(|x| out.extend_from_slice(&x.to_le_bytes())),
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER_LEN {
            return Err(Error::Format(format!(
                "file has {} bytes, shorter than the {HEADER_LEN}-byte header",
                bytes.len()
            )));
        }
        if &bytes[..4] != MAGIC {
            return Err(Error::Format(format!("bad magic {:?}", &bytes[..4])));
        }
        let code = bytes[4];
        let size = Self::elem_size(code)
            .ok_or_else(|| Error::Format(format!("unknown dtype code {code}")))?;
        let len = u64::from_le_bytes(bytes[5..HEADER_LEN].try_into().expect("8-byte slice"));
        let body = &bytes[HEADER_LEN..];
        let expected = usize::try_from(len)
            .ok()
            .and_then(|l| l.checked_mul(size))
            .ok_or_else(|| Error::Format(format!("length {len} is too large")))?;
        if body.len() != expected {
            return Err(Error::Format(format!(
                "header declares {len} elements ({expected} bytes) but the body has {} bytes",
                body.len()
            )));
        }
        let pairs = || body.chunks_exact(2).map(|c| [c[0], c[1]]);
        Ok(match code {
            0 => ArrayData::F16(pairs().map(f16::from_le_bytes).collect()),
            1 => ArrayData::I8(body.iter().map(|&b| b as i8).collect()),
            _ => ArrayData::U16(pairs().map(u16::from_le_bytes).collect()),
        })
    }
}

pub fn read_array<R: Read>(mut reader: R) -> Result<ArrayData> {
    let mut bytes = Vec::new();
    reader.read_to_end(&mut bytes)?;
    ArrayData::from_bytes(&bytes)
}

pub fn write_array<W: Write>(mut writer: W, data: &ArrayData) -> Result<()> {
    writer.write_all(&data.to_bytes())?;
    writer.flush()?;
    Ok(())
}

pub fn read_input(path: &Path) -> Result<ArrayData> {
    read_array(BufReader::new(File::open(path)?))
}

pub fn write_output(path: &Path, data: &ArrayData) -> Result<()> {
    write_array(BufWriter::new(File::create(path)?), data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn empty_file_is_header_only() {
        let bytes = ArrayData::I8(vec![]).to_bytes();
        assert_eq!(bytes.len(), HEADER_LEN);
        assert_eq!(ArrayData::from_bytes(&bytes).unwrap(), ArrayData::I8(vec![]));
    }

    #[test]
    fn layout_is_little_endian() {
        let bytes = ArrayData::U16(vec![0x0102]).to_bytes();
        assert_eq!(bytes, [b'S', b'C', b'N', b'1', 2, 1, 0, 0, 0, 0, 0, 0, 0, 0x02, 0x01]);
    }

    #[test]
    fn corrupt_inputs_are_format_errors() {
        let good = ArrayData::F16(vec![f16::ONE, f16::NEG_ONE]).to_bytes();

        let mut bad_magic = good.clone();
        bad_magic[0] = b'X';
        let mut bad_code = good.clone();
        bad_code[4] = 9;
        let truncated = &good[..good.len() - 1];
        let mut trailing = good.clone();
        trailing.push(0);
        let mut huge = good.clone();
        huge[5..13].copy_from_slice(&u64::MAX.to_le_bytes());

        for bytes in [&bad_magic[..], &bad_code, truncated, &trailing, &huge, &good[..3]] {
            assert!(matches!(ArrayData::from_bytes(bytes), Err(Error::Format(_))));
        }
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.scn");
        let data = ArrayData::I8(vec![-128, 0, 127]);
        write_output(&path, &data).unwrap();
        assert_eq!(read_input(&path).unwrap(), data);
        assert!(matches!(
            read_input(&dir.path().join("missing")),
            Err(Error::Io(_))
        ));
    }

    proptest! {
        #[test]
        fn bytes_round_trip(bits in prop::collection::vec(any::<u16>(), 0..300), code in 0u8..3) {
            let data = match code {
                0 => ArrayData::F16(bits.iter().map(|&b| f16::from_bits(b)).collect()),
                1 => ArrayData::I8(bits.iter().map(|&b| b as i8).collect()),
                _ => ArrayData::U16(bits),
            };
            let bytes = data.to_bytes();
            let back = ArrayData::from_bytes(&bytes).unwrap();
            prop_assert_eq!(back.to_bytes(), bytes);
        }
    }
}
