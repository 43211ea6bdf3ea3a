//! Polynomial arithmetic over GF(2) and the Galois LFSR primitives.
//!
//! Convention everywhere: bit `i` of a mask is the coefficient of `x^i`, so the
//! low bit is the constant term. A block state of width `q` is a polynomial of
//! degree `< q` reduced modulo a degree-`q` generator.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Largest supported generator degree; blocks are at most 32 bits wide.
pub const MAX_DEGREE: u32 = 32;

/// A q-bit register state, low bit = constant term.
pub type BlockState = u32;

/// Distinct prime factors of `2^m - 1` for `m = 1..=32`, indexed by `m - 1`.
const MERSENNE_FACTORS: [&[u64]; 32] = [
    &[],
    &[3],
    &[7],
    &[3, 5],
    &[31],
    &[3, 7],
    &[127],
    &[3, 5, 17],
    &[7, 73],
    &[3, 11, 31],
    &[23, 89],
    &[3, 5, 7, 13],
    &[8191],
    &[3, 43, 127],
    &[7, 31, 151],
    &[3, 5, 17, 257],
    &[131071],
    &[3, 7, 19, 73],
    &[524287],
    &[3, 5, 11, 31, 41],
    &[7, 127, 337],
    &[3, 23, 89, 683],
    &[47, 178481],
    &[3, 5, 7, 13, 17, 241],
    &[31, 601, 1801],
    &[3, 2731, 8191],
    &[7, 73, 262657],
    &[3, 5, 29, 43, 113, 127],
    &[233, 1103, 2089],
    &[3, 7, 11, 31, 151, 331],
    &[2147483647],
    &[3, 5, 17, 257, 65537],
];

/// A polynomial over GF(2) of degree at most 32, stored as a coefficient mask.
///
/// The mask is always canonical: bits above the degree are zero, so two
/// polynomials are equal exactly when their masks are equal. The zero
/// polynomial is the all-zero mask and has no degree.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Gf2Poly(u64);

impl Gf2Poly {
    pub const ZERO: Gf2Poly = Gf2Poly(0);
    pub const ONE: Gf2Poly = Gf2Poly(1);
    pub const X: Gf2Poly = Gf2Poly(2);

    /// Builds a polynomial from its coefficient mask.
    pub fn from_mask(mask: u64) -> Result<Self> {
        if mask >> (MAX_DEGREE + 1) != 0 {
            return Err(Error::DegreeOutOfRange(63 - mask.leading_zeros()));
        }
        Ok(Gf2Poly(mask))
    }

    /// Builds a polynomial from the exponents of its nonzero terms.
    pub fn from_exponents(exps: &[u32]) -> Result<Self> {
        let mut mask = 0u64;
        for &e in exps {
            if e > MAX_DEGREE {
                return Err(Error::DegreeOutOfRange(e));
            }
            mask ^= 1 << e;
        }
        Ok(Gf2Poly(mask))
    }

    pub fn mask(self) -> u64 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    /// `None` for the zero polynomial.
    pub fn degree(self) -> Option<u32> {
        if self.0 == 0 {
            None
        } else {
            Some(63 - self.0.leading_zeros())
        }
    }

    pub fn weight(self) -> u32 {
        self.0.count_ones()
    }
}

impl fmt::Debug for Gf2Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 == 0 {
            return write!(f, "0");
        }
        let mut first = true;
        for e in (0..=MAX_DEGREE).rev().filter(|e| self.0 >> e & 1 == 1) {
            if !first {
                write!(f, "+")?;
            }
            first = false;
            match e {
                0 => write!(f, "1")?,
                1 => write!(f, "x")?,
                _ => write!(f, "x^{e}")?,
            }
        }
        Ok(())
    }
}

/// Serialized form: `deg=4 coeffs=0x13`.
impl fmt::Display for Gf2Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.degree() {
            Some(d) => write!(f, "deg={d} coeffs={:#x}", self.0),
            None => write!(f, "deg=-1 coeffs=0x0"),
        }
    }
}

impl FromStr for Gf2Poly {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut deg: Option<i64> = None;
        let mut coeffs: Option<u64> = None;
        for field in s.split_whitespace() {
            if let Some(v) = field.strip_prefix("deg=") {
                deg = Some(v.parse().map_err(|_| Error::parse(format!("bad degree `{v}`")))?);
            } else if let Some(v) = field.strip_prefix("coeffs=") {
                let hex = v
                    .strip_prefix("0x")
                    .ok_or_else(|| Error::parse(format!("coefficients must be 0x-prefixed: `{v}`")))?;
                coeffs = Some(
                    u64::from_str_radix(hex, 16)
                        .map_err(|_| Error::parse(format!("bad coefficient mask `{v}`")))?,
                );
            } else {
                return Err(Error::parse(format!("unexpected polynomial field `{field}`")));
            }
        }
        let (deg, coeffs) = match (deg, coeffs) {
            (Some(d), Some(c)) => (d, c),
            _ => return Err(Error::parse(format!("polynomial needs deg= and coeffs=: `{s}`"))),
        };
        let poly = Gf2Poly::from_mask(coeffs)?;
        let actual = poly.degree().map_or(-1, i64::from);
        if actual != deg {
            return Err(Error::parse(format!(
                "declared degree {deg} does not match coefficients {coeffs:#x}"
            )));
        }
        Ok(poly)
    }
}

/// Carry-less product of two masks of at most 33 bits.
fn clmul(a: u64, b: u64) -> u128 {
    let mut acc = 0u128;
    let mut b = b;
    let mut shifted = a as u128;
    while b != 0 {
        if b & 1 == 1 {
            acc ^= shifted;
        }
        b >>= 1;
        shifted <<= 1;
    }
    acc
}

/// Remainder of `value` modulo a generator of degree `d >= 1`.
fn reduce(mut value: u128, g: u64, d: u32) -> u64 {
    let g = g as u128;
    while value >> d != 0 {
        let top = 127 - value.leading_zeros();
        value ^= g << (top - d);
    }
    value as u64
}

fn modulus_degree(g: Gf2Poly) -> Result<u32> {
    match g.degree() {
        Some(d) if d >= 1 => Ok(d),
        _ => Err(Error::DegenerateModulus),
    }
}

/// `a * b mod g` in GF(2)[x].
pub fn poly_mul_mod(a: Gf2Poly, b: Gf2Poly, g: Gf2Poly) -> Result<Gf2Poly> {
    let d = modulus_degree(g)?;
    let a = reduce(a.0 as u128, g.0, d);
    let b = reduce(b.0 as u128, g.0, d);
    Ok(Gf2Poly(reduce(clmul(a, b), g.0, d)))
}

/// `x^e mod g` by square-and-multiply.
pub fn x_pow_mod(e: u64, g: Gf2Poly) -> Result<Gf2Poly> {
    let d = modulus_degree(g)?;
    let mut result = reduce(1, g.0, d);
    let mut base = reduce(2, g.0, d);
    let mut e = e;
    while e != 0 {
        if e & 1 == 1 {
            result = reduce(clmul(result, base), g.0, d);
        }
        base = reduce(clmul(base, base), g.0, d);
        e >>= 1;
    }
    Ok(Gf2Poly(result))
}

/// True iff `x` has multiplicative order exactly `2^m - 1` modulo `g`.
///
/// Full order implies irreducibility: a reducible modulus has fewer than
/// `2^m - 1` units, so no element can reach that order.
pub fn is_primitive(g: Gf2Poly) -> Result<bool> {
    let m = match g.degree() {
        Some(d) if (1..=MAX_DEGREE).contains(&d) => d,
        Some(d) => return Err(Error::DegreeOutOfRange(d)),
        None => return Err(Error::DegenerateModulus),
    };
    let group_order = (1u64 << m) - 1;
    if x_pow_mod(group_order, g)? != Gf2Poly::ONE {
        return Ok(false);
    }
    for &p in MERSENNE_FACTORS[(m - 1) as usize] {
        if x_pow_mod(group_order / p, g)? == Gf2Poly::ONE {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Result of an ascending scan for primitive polynomials of one degree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyLibrary {
    pub degree: u32,
    pub polys: Vec<Gf2Poly>,
    /// Set when fewer than the requested count exist.
    pub exhausted: bool,
}

/// The first `count` primitive polynomials of degree `q`, ascending by mask.
pub fn primitive_polys(q: u32, count: usize) -> Result<PolyLibrary> {
    if !(2..=MAX_DEGREE).contains(&q) {
        return Err(Error::DegreeOutOfRange(q));
    }
    let mut polys = Vec::with_capacity(count.min(1 << 12));
    let lead = 1u64 << q;
    // Even masks are divisible by x and never primitive.
    let mut low = 1u64;
    while low < lead && polys.len() < count {
        let g = Gf2Poly(lead | low);
        if is_primitive(g)? {
            polys.push(g);
        }
        low += 2;
    }
    let exhausted = polys.len() < count;
    Ok(PolyLibrary {
        degree: q,
        polys,
        exhausted,
    })
}

/// A primitive generator prepared for the LFSR hot path.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct Lfsr {
    poly: Gf2Poly,
    width: u32,
    // g without its leading term
    feedback: u64,
    state_mask: u64,
}

impl Lfsr {
    pub fn new(g: Gf2Poly) -> Result<Self> {
        let width = match g.degree() {
            Some(d) if (1..=MAX_DEGREE).contains(&d) => d,
            Some(d) => return Err(Error::DegreeOutOfRange(d)),
            None => return Err(Error::DegenerateModulus),
        };
        let state_mask = (1u64 << width) - 1;
        Ok(Lfsr {
            poly: g,
            width,
            feedback: g.0 & state_mask,
            state_mask,
        })
    }

    pub fn poly(&self) -> Gf2Poly {
        self.poly
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    /// `s * x mod g`.
    #[inline]
    pub fn step(&self, s: BlockState) -> BlockState {
        let s = s as u64 & self.state_mask;
        let carry = s >> (self.width - 1) & 1;
        let next = (s << 1) & self.state_mask;
        (next ^ (self.feedback & carry.wrapping_neg())) as BlockState
    }

    /// `s * x^-1 mod g`. Needs a nonzero constant term in `g`, which every
    /// primitive generator of degree >= 1 has.
    #[inline]
    pub fn step_inv(&self, s: BlockState) -> BlockState {
        let s = s as u64 & self.state_mask;
        let low = s & 1;
        let unreduced = s ^ (self.feedback & low.wrapping_neg());
        // Restore the top bit the forward step carried out.
        ((unreduced >> 1) | (low << (self.width - 1))) as BlockState
    }

    /// `x^q * s mod g`: q forward steps.
    #[inline]
    pub fn diffuse(&self, s: BlockState) -> BlockState {
        (0..self.width).fold(s, |acc, _| self.step(acc))
    }

    #[inline]
    pub fn diffuse_inv(&self, s: BlockState) -> BlockState {
        (0..self.width).fold(s, |acc, _| self.step_inv(acc))
    }
}

/// One Galois LFSR step under `g`.
pub fn lfsr_step(s: BlockState, g: Gf2Poly) -> Result<BlockState> {
    Ok(Lfsr::new(g)?.step(s))
}

pub fn lfsr_step_inv(s: BlockState, g: Gf2Poly) -> Result<BlockState> {
    Ok(Lfsr::new(g)?.step_inv(s))
}

/// `x^q * s mod g` with `q = deg(g)`.
pub fn diffuse(s: BlockState, g: Gf2Poly) -> Result<BlockState> {
    Ok(Lfsr::new(g)?.diffuse(s))
}

pub fn diffuse_inv(s: BlockState, g: Gf2Poly) -> Result<BlockState> {
    Ok(Lfsr::new(g)?.diffuse_inv(s))
}

/// Number of forward steps before `start` recurs; 0 if it never does within
/// `2^q` steps (cannot happen for a bijective step).
pub fn lfsr_period(start: BlockState, g: Gf2Poly) -> Result<u64> {
    let lfsr = Lfsr::new(g)?;
    let limit = 1u64 << lfsr.width();
    let mut s = lfsr.step(start);
    let mut n = 1u64;
    while s != start {
        if n >= limit {
            return Ok(0);
        }
        s = lfsr.step(s);
        n += 1;
    }
    Ok(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(mask: u64) -> Gf2Poly {
        Gf2Poly::from_mask(mask).unwrap()
    }

    /// Schoolbook oracle over explicit coefficient vectors.
    fn schoolbook_mul_mod(a: u64, b: u64, g: u64) -> u64 {
        let coeffs = |m: u64| (0..64).map(|i| (m >> i & 1) as u8).collect::<Vec<u8>>();
        let (ca, cb, cg) = (coeffs(a), coeffs(b), coeffs(g));
        let mut prod = [0u8; 128];
        for i in 0..64 {
            for j in 0..64 {
                prod[i + j] ^= ca[i] & cb[j];
            }
        }
        let dg = (0..64).rev().find(|&i| cg[i] == 1).unwrap();
        for top in (dg..128).rev() {
            if prod[top] == 1 {
                for k in 0..=dg {
                    prod[top - dg + k] ^= cg[k];
                }
            }
        }
        prod.iter().take(64).enumerate().fold(0, |m, (i, &c)| m | (c as u64) << i)
    }

    /// Order of x found by enumerating powers.
    fn order_by_enumeration(g: u64) -> Option<u64> {
        let d = 63 - g.leading_zeros();
        let mut power = reduce(2, g, d);
        for n in 1..=(1u64 << d) {
            if power == 1 {
                return Some(n);
            }
            power = reduce((power as u128) << 1, g, d);
        }
        None
    }

    #[test]
    fn mul_mod_examples() {
        assert_eq!(poly_mul_mod(Gf2Poly::X, Gf2Poly::X, p(0b111)).unwrap(), p(0b11));
        assert_eq!(poly_mul_mod(Gf2Poly::ZERO, p(0b1011), p(0x13)).unwrap(), Gf2Poly::ZERO);
        assert_eq!(poly_mul_mod(Gf2Poly::ONE, p(0b1000), p(0x13)).unwrap(), p(0b1000));
        assert!(matches!(
            poly_mul_mod(Gf2Poly::X, Gf2Poly::X, Gf2Poly::ONE),
            Err(Error::DegenerateModulus)
        ));
    }

    #[test]
    fn mul_mod_matches_schoolbook() {
        let gens = [0x13u64, 0x19, 0x1002d, 0x100000000 | 0x8d, 0b111];
        let mut seed = 0x9e3779b97f4a7c15u64;
        for &g in &gens {
            for _ in 0..200 {
                seed ^= seed << 13;
                seed ^= seed >> 7;
                seed ^= seed << 17;
                let a = seed & 0x1_ffff_ffff;
                let b = (seed >> 29) & 0x1_ffff_ffff;
                assert_eq!(
                    poly_mul_mod(p(a), p(b), p(g)).unwrap().mask(),
                    schoolbook_mul_mod(a, b, g),
                    "a={a:#x} b={b:#x} g={g:#x}"
                );
            }
        }
    }

    #[test]
    fn primitivity_examples() {
        assert!(is_primitive(p(0x13)).unwrap());
        assert_eq!(order_by_enumeration(0x13), Some(15));
        assert!(!is_primitive(p(0b11111)).unwrap());
        assert_eq!(order_by_enumeration(0b11111), Some(5));
        assert!(!is_primitive(p(0b101)).unwrap());
        assert!(matches!(is_primitive(Gf2Poly::ONE), Err(Error::DegreeOutOfRange(0))));
        assert!(matches!(is_primitive(Gf2Poly::ZERO), Err(Error::DegenerateModulus)));
    }

    #[test]
    fn primitivity_agrees_with_enumeration_up_to_degree_12() {
        for d in 2..=12u32 {
            for low in 0..(1u64 << d) {
                let g = (1u64 << d) | low;
                let full = order_by_enumeration(g) == Some((1 << d) - 1);
                assert_eq!(is_primitive(p(g)).unwrap(), full, "g={g:#x}");
            }
        }
    }

    #[test]
    fn library_examples() {
        let lib = primitive_polys(4, 2).unwrap();
        assert_eq!(lib.polys, vec![p(0x13), p(0x19)]);
        assert!(!lib.exhausted);
        let lib = primitive_polys(2, 1).unwrap();
        assert_eq!(lib.polys, vec![p(0b111)]);
        let lib = primitive_polys(10, 100).unwrap();
        assert_eq!(lib.polys.len(), 60);
        assert!(lib.exhausted);
        assert!(lib.polys.windows(2).all(|w| w[0] < w[1]));
        assert!(primitive_polys(1, 1).is_err());
        assert!(primitive_polys(33, 1).is_err());
    }

    #[test]
    fn step_examples() {
        let g = p(0x13);
        assert_eq!(lfsr_step(0b0001, g).unwrap(), 0b0010);
        assert_eq!(lfsr_step(0b1000, g).unwrap(), 0b0011);
        assert_eq!(lfsr_step(0, g).unwrap(), 0);
        assert_eq!(lfsr_step_inv(0b0010, g).unwrap(), 0b0001);
        assert_eq!(lfsr_step_inv(0b0011, g).unwrap(), 0b1000);
        for s in 0..16 {
            assert_eq!(lfsr_step_inv(lfsr_step(s, g).unwrap(), g).unwrap(), s);
        }
    }

    #[test]
    fn diffuse_examples() {
        let g = p(0x13);
        assert_eq!(diffuse(0b0001, g).unwrap(), 0b0011);
        assert_eq!(diffuse(0, g).unwrap(), 0);
        assert_eq!(diffuse_inv(0b0011, g).unwrap(), 0b0001);
        assert_eq!(diffuse_inv(0, g).unwrap(), 0);
        for s in 0..16 {
            assert_eq!(diffuse_inv(diffuse(s, g).unwrap(), g).unwrap(), s);
        }
        for a in 0..16 {
            for b in 0..16 {
                assert_eq!(
                    diffuse(a, g).unwrap() ^ diffuse(b, g).unwrap(),
                    diffuse(a ^ b, g).unwrap()
                );
            }
        }
    }

    #[test]
    fn diffuse_is_x_pow_q_mod_g() {
        for &g in &[0x13u64, 0x19, 0x1002d, 0x409] {
            let g = p(g);
            let q = g.degree().unwrap();
            for s in [1u32, 2, 5, 0x155].map(|s| s & ((1 << q) - 1)) {
                let expected = poly_mul_mod(p(s as u64), x_pow_mod(q as u64, g).unwrap(), g).unwrap();
                assert_eq!(diffuse(s, g).unwrap() as u64, expected.mask());
            }
        }
    }

    #[test]
    fn linear_bijection_exhaustive_through_degree_8() {
        for q in 2..=8 {
            for g in primitive_polys(q, 4).unwrap().polys {
                let lfsr = Lfsr::new(g).unwrap();
                let n = 1u32 << q;
                let mut seen = vec![false; n as usize];
                for s in 0..n {
                    let d = lfsr.diffuse(s);
                    assert!(!seen[d as usize]);
                    seen[d as usize] = true;
                    assert_eq!(lfsr.diffuse_inv(d), s);
                    assert_eq!(lfsr.step_inv(lfsr.step(s)), s);
                }
                for a in 0..n {
                    for b in 0..n {
                        assert_eq!(lfsr.diffuse(a) ^ lfsr.diffuse(b), lfsr.diffuse(a ^ b));
                    }
                }
            }
        }
    }

    #[test]
    fn width_32_roundtrip() {
        let g = primitive_polys(32, 1).unwrap().polys[0];
        let lfsr = Lfsr::new(g).unwrap();
        for s in [1u32, 0x8000_0000, 0xdead_beef, u32::MAX] {
            assert_eq!(lfsr.step_inv(lfsr.step(s)), s);
            assert_eq!(lfsr.diffuse_inv(lfsr.diffuse(s)), s);
        }
    }

    #[test]
    fn full_period_for_small_degrees() {
        for q in 2..=12 {
            for g in primitive_polys(q, 3).unwrap().polys {
                assert_eq!(lfsr_period(1, g).unwrap(), (1 << q) - 1);
                assert_eq!(lfsr_period(0b11, g).unwrap(), (1 << q) - 1);
            }
        }
    }

    #[test]
    fn display_roundtrip() {
        let g = p(0x13);
        assert_eq!(g.to_string(), "deg=4 coeffs=0x13");
        assert_eq!("deg=4 coeffs=0x13".parse::<Gf2Poly>().unwrap(), g);
        assert!("deg=5 coeffs=0x13".parse::<Gf2Poly>().is_err());
        assert!("deg=4".parse::<Gf2Poly>().is_err());
        assert_eq!(format!("{g:?}"), "x^4+x+1");
    }
}
