//! Bit-string helpers. Bits are `bool`s; packing is big-endian within bytes.

use std::io::{self, Read, Write};

pub fn pack(bits: &[bool]) -> Vec<u8> {
    let mut out = vec![0u8; bits.len().div_ceil(8)];
    for (i, &b) in bits.iter().enumerate() {
        if b {
            out[i / 8] |= 0x80 >> (i % 8);
        }
    }
    out
}

/// First `len` bits of `bytes`.
pub fn unpack(bytes: &[u8], len: usize) -> Vec<bool> {
    (0..len).map(|i| bytes[i / 8] & (0x80 >> (i % 8)) != 0).collect()
}

pub fn hamming(a: &[bool], b: &[bool]) -> usize {
    assert_eq!(a.len(), b.len(), "hamming distance needs equal lengths");
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

/// Big-endian unsigned value of a bit slice (at most 64 bits).
pub fn to_uint(bits: &[bool]) -> u64 {
    bits.iter().fold(0, |acc, &b| (acc << 1) | b as u64)
}

pub fn from_uint(value: u64, width: usize) -> Vec<bool> {
    (0..width).rev().map(|i| (value >> i) & 1 == 1).collect()
}

/// Length-prefixed encoding: u32 bit count, then packed bytes.
pub fn write_framed<W: Write>(mut out: W, bits: &[bool]) -> io::Result<()> {
    let len = u32::try_from(bits.len()).map_err(|_| io::Error::other("bit string too long"))?;
    out.write_all(&len.to_be_bytes())?;
    out.write_all(&pack(bits))
}

pub fn read_framed<R: Read>(mut input: R) -> io::Result<Vec<bool>> {
    let mut len = [0u8; 4];
    input.read_exact(&mut len)?;
    let len = u32::from_be_bytes(len) as usize;
    let mut bytes = vec![0u8; len.div_ceil(8)];
    input.read_exact(&mut bytes)?;
    Ok(unpack(&bytes, len))
}

/// Query access to a received word that records every position read.
#[derive(Debug)]
pub struct Probe<'a> {
    word: &'a [bool],
    reads: Vec<usize>,
}

impl<'a> Probe<'a> {
    pub fn new(word: &'a [bool]) -> Self {
        Probe { word, reads: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.word.len()
    }

    pub fn is_empty(&self) -> bool {
        self.word.is_empty()
    }

    pub fn read(&mut self, pos: usize) -> bool {
        self.reads.push(pos);
        self.word[pos]
    }

    pub fn reads(&self) -> &[usize] {
        &self.reads
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn packing_is_big_endian() {
        assert_eq!(pack(&[true, false, false, false, false, false, false, true, true]), vec![0x81, 0x80]);
        assert_eq!(to_uint(&[true, false, true]), 5);
        assert_eq!(from_uint(5, 4), vec![false, true, false, true]);
    }

    proptest! {
        #[test]
        fn framed_round_trip(bits in proptest::collection::vec(any::<bool>(), 0..300)) {
            let mut buf = Vec::new();
            write_framed(&mut buf, &bits).unwrap();
            prop_assert_eq!(buf.len(), 4 + bits.len().div_ceil(8));
            prop_assert_eq!(read_framed(&buf[..]).unwrap(), bits);
        }
    }
}
