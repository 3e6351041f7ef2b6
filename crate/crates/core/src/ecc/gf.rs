//! Binary extension fields GF(2^m) with log/antilog tables.

use super::EccError;

/// Primitive polynomials, indexed by `m`.
const PRIMITIVE: [u32; 13] = [
    0, 0, 0x7, 0xb, 0x13, 0x25, 0x43, 0x89, 0x11d, 0x211, 0x409, 0x805, 0x1053,
];

#[derive(Clone, Debug)]
pub struct Field {
    m: u32,
    exp: Vec<u16>,
    log: Vec<u16>,
}

impl Field {
    pub fn new(m: u32) -> Result<Self, EccError> {
        if !(2..=12).contains(&m) {
            return Err(EccError::BadParams(format!("field degree {m} outside 2..=12")));
        }
        let order = (1usize << m) - 1;
        let poly = PRIMITIVE[m as usize];
        let mut exp = vec![0u16; 2 * order];
        let mut log = vec![0u16; order + 1];
        let mut x: u32 = 1;
        for (i, e) in exp.iter_mut().take(order).enumerate() {
            *e = x as u16;
            log[x as usize] = i as u16;
            x <<= 1;
            if x & (1 << m) != 0 {
                x ^= poly;
            }
        }
        for i in order..2 * order {
            exp[i] = exp[i - order];
        }
        Ok(Field { m, exp, log })
    }

    pub fn degree(&self) -> u32 {
        self.m
    }

    pub fn size(&self) -> usize {
        1 << self.m
    }

    fn order(&self) -> usize {
        self.size() - 1
    }

    pub fn add(&self, a: u16, b: u16) -> u16 {
        a ^ b
    }

    pub fn mul(&self, a: u16, b: u16) -> u16 {
        if a == 0 || b == 0 {
            return 0;
        }
        self.exp[self.log[a as usize] as usize + self.log[b as usize] as usize]
    }

    pub fn inv(&self, a: u16) -> u16 {
        assert!(a != 0, "zero has no inverse");
        self.exp[(self.order() - self.log[a as usize] as usize) % self.order()]
    }

    pub fn div(&self, a: u16, b: u16) -> u16 {
        self.mul(a, self.inv(b))
    }

    pub fn pow(&self, a: u16, e: u64) -> u16 {
        if e == 0 {
            return 1;
        }
        if a == 0 {
            return 0;
        }
        let l = (self.log[a as usize] as u64 * (e % self.order() as u64)) % self.order() as u64;
        self.exp[l as usize]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_axioms_hold_exhaustively_for_small_fields() {
        for m in 2..=5 {
            let f = Field::new(m).unwrap();
            let q = f.size() as u16;
            for a in 0..q {
                assert_eq!(f.mul(a, 1), a);
                assert_eq!(f.mul(a, 0), 0);
                if a != 0 {
                    assert_eq!(f.mul(a, f.inv(a)), 1);
                }
                for b in 0..q {
                    assert_eq!(f.mul(a, b), f.mul(b, a));
                    for c in 0..q {
                        assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                        assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                    }
                }
            }
        }
    }

    #[test]
    fn generator_has_full_order() {
        for m in 2..=12 {
            let f = Field::new(m).unwrap();
            let mut seen = std::collections::HashSet::new();
            for e in 0..f.order() as u64 {
                seen.insert(f.pow(2, e));
            }
            assert_eq!(seen.len(), f.order(), "m = {m}");
        }
    }

    #[test]
    fn rejects_unsupported_degree() {
        assert!(Field::new(1).is_err());
        assert!(Field::new(13).is_err());
    }
}
