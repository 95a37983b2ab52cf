//! Compressed-block container.
//!
//! Layout: magic `PLMEM001`, `N` (u32 LE), `|F|` (u32 LE), the frozen
//! indices as LEB128 gaps (first gap from 0, 1-based indices), the payload
//! bits packed LSB-first, then a CRC32 (LE) of everything before it.

use crate::{Error, Result};

pub const MAGIC: &[u8; 8] = b"PLMEM001";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompressedBlock {
    pub n: usize,
    /// 1-based, strictly increasing.
    pub frozen: Vec<usize>,
    pub bits: Vec<u8>,
}

fn put_varint(out: &mut Vec<u8>, mut v: u64) {
    loop {
        let byte = (v & 0x7f) as u8;
        v >>= 7;
        if v == 0 {
            out.push(byte);
            return;
        }
        out.push(byte | 0x80);
    }
}

fn get_varint(buf: &[u8], pos: &mut usize) -> Result<u64> {
    let mut v = 0u64;
    for shift in (0..64).step_by(7) {
        let &b = buf
            .get(*pos)
            .ok_or_else(|| Error::CorruptBlock("truncated varint".into()))?;
        *pos += 1;
        v |= ((b & 0x7f) as u64) << shift;
        if b & 0x80 == 0 {
            return Ok(v);
        }
    }
    Err(Error::CorruptBlock("varint too long".into()))
}

impl CompressedBlock {
    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        if self.bits.len() != self.frozen.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} bits for {} frozen indices",
                self.bits.len(),
                self.frozen.len()
            )));
        }
        let n = u32::try_from(self.n).map_err(|_| Error::Domain("N does not fit in u32".into()))?;
        let mut out = Vec::with_capacity(20 + self.frozen.len() / 4);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&n.to_le_bytes());
        out.extend_from_slice(&(self.frozen.len() as u32).to_le_bytes());
        let mut prev = 0usize;
        for &i in &self.frozen {
            if i <= prev || i > self.n {
                return Err(Error::Domain(format!(
                    "frozen index {i} out of order or range"
                )));
            }
            put_varint(&mut out, (i - prev) as u64);
            prev = i;
        }
        let mut packed = vec![0u8; self.bits.len().div_ceil(8)];
        for (j, &b) in self.bits.iter().enumerate() {
            packed[j / 8] |= (b & 1) << (j % 8);
        }
        out.extend_from_slice(&packed);
        let crc = crc32fast::hash(&out);
        out.extend_from_slice(&crc.to_le_bytes());
        Ok(out)
    }

    pub fn from_bytes(buf: &[u8]) -> Result<Self> {
        let corrupt = |msg: &str| Error::CorruptBlock(msg.into());
        if buf.len() < 8 + 4 + 4 + 4 {
            return Err(corrupt("too short"));
        }
        if &buf[..8] != MAGIC {
            return Err(corrupt("bad magic"));
        }
        let (body, tail) = buf.split_at(buf.len() - 4);
        let crc = u32::from_le_bytes(tail.try_into().expect("4 bytes"));
        if crc32fast::hash(body) != crc {
            return Err(corrupt("checksum mismatch"));
        }
        let n = u32::from_le_bytes(body[8..12].try_into().expect("4 bytes")) as usize;
        let count = u32::from_le_bytes(body[12..16].try_into().expect("4 bytes")) as usize;
        if count > n {
            return Err(corrupt("more frozen indices than N"));
        }
        let mut pos = 16;
        let mut frozen = Vec::with_capacity(count);
        let mut prev = 0usize;
        for _ in 0..count {
            let gap = get_varint(body, &mut pos)? as usize;
            if gap == 0 || prev + gap > n {
                return Err(corrupt("frozen index out of range"));
            }
            prev += gap;
            frozen.push(prev);
        }
        let packed = &body[pos..];
        if packed.len() != count.div_ceil(8) {
            return Err(corrupt("payload length mismatch"));
        }
        let bits = (0..count).map(|j| (packed[j / 8] >> (j % 8)) & 1).collect();
        Ok(Self { n, frozen, bits })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_is_pinned() {
        let blk = CompressedBlock {
            n: 8,
            frozen: vec![2, 3, 8],
            bits: vec![1, 0, 1],
        };
        let bytes = blk.to_bytes().unwrap();
        assert_eq!(&bytes[..8], b"PLMEM001");
        assert_eq!(&bytes[8..16], &[8, 0, 0, 0, 3, 0, 0, 0]);
        assert_eq!(&bytes[16..19], &[2, 1, 5]);
        assert_eq!(bytes[19], 0b101);
        assert_eq!(bytes.len(), 24);
        assert_eq!(CompressedBlock::from_bytes(&bytes).unwrap(), blk);
    }

    #[test]
    fn large_gaps_use_multibyte_varints() {
        let blk = CompressedBlock {
            n: 4096,
            frozen: vec![1, 4000],
            bits: vec![0, 1],
        };
        let bytes = blk.to_bytes().unwrap();
        assert_eq!(CompressedBlock::from_bytes(&bytes).unwrap(), blk);
    }

    #[test]
    fn corruption_is_detected() {
        let blk = CompressedBlock {
            n: 16,
            frozen: vec![1, 5, 9],
            bits: vec![1, 1, 0],
        };
        let mut bytes = blk.to_bytes().unwrap();
        bytes[17] ^= 4;
        assert!(matches!(
            CompressedBlock::from_bytes(&bytes),
            Err(Error::CorruptBlock(_))
        ));
        assert!(CompressedBlock::from_bytes(&bytes[..10]).is_err());
    }
}
