//! Compact byte encoding for attacker state and I/O.

use crate::bits;

#[derive(Default)]
pub struct Writer(Vec<u8>);

impl Writer {
    pub fn new() -> Self {
        Writer(Vec::new())
    }

    pub fn u32(&mut self, v: u32) -> &mut Self {
        self.0.extend_from_slice(&v.to_be_bytes());
        self
    }

    pub fn bytes(&mut self, b: &[u8]) -> &mut Self {
        self.u32(b.len() as u32);
        self.0.extend_from_slice(b);
        self
    }

    pub fn bits(&mut self, b: &[bool]) -> &mut Self {
        self.u32(b.len() as u32);
        self.0.extend_from_slice(&bits::pack(b));
        self
    }

    pub fn finish(&mut self) -> Vec<u8> {
        std::mem::take(&mut self.0)
    }
}

pub struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    pub fn new(buf: &'a [u8]) -> Self {
        Reader { buf, pos: 0 }
    }

    pub fn u32(&mut self) -> u32 {
        let v = u32::from_be_bytes(self.buf[self.pos..self.pos + 4].try_into().unwrap());
        self.pos += 4;
        v
    }

    pub fn bytes(&mut self) -> &'a [u8] {
        let n = self.u32() as usize;
        let out = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        out
    }

    pub fn bits(&mut self) -> Vec<bool> {
        let n = self.u32() as usize;
        let nb = n.div_ceil(8);
        let out = bits::unpack(&self.buf[self.pos..self.pos + nb], n);
        self.pos += nb;
        out
    }
}

/// Attacker output: flip positions as big-endian u32s.
pub fn encode_flips(flips: &[usize]) -> Vec<u8> {
    flips.iter().flat_map(|&p| (p as u32).to_be_bytes()).collect()
}

pub fn decode_flips(out: &[u8]) -> Vec<usize> {
    out.chunks_exact(4).map(|c| u32::from_be_bytes(c.try_into().unwrap()) as usize).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let buf = Writer::new().u32(7).bytes(b"abc").bits(&[true, false, true]).finish();
        let mut r = Reader::new(&buf);
        assert_eq!(r.u32(), 7);
        assert_eq!(r.bytes(), b"abc");
        assert_eq!(r.bits(), vec![true, false, true]);
        assert_eq!(decode_flips(&encode_flips(&[1, 70000])), vec![1, 70000]);
    }
}
