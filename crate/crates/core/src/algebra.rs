//! The binding algebra: bind, unbind, XOR bundling, crosstalk readout, and
//! single-role intervention.
//!
//! `bind(R, F) = R ^ shift(F)` and `unbind(B, R) = shift^-1(B ^ R)`. Every
//! operation here is GF(2)-affine. One consequence worth keeping in view: a
//! bundle `XOR_i bind(R_i, F_i)` equals `(XOR_i R_i) ^ shift(XOR_i F_i)`, so it
//! records which roles and which fillers were used but not how they were
//! paired.

use crate::error::Result;
use crate::hypervector::{BlockPolynomialConfig, Hypervector};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoleFillerPair {
    pub role: Hypervector,
    pub filler: Hypervector,
}

impl RoleFillerPair {
    pub fn new(role: Hypervector, filler: Hypervector) -> Self {
        RoleFillerPair { role, filler }
    }
}

/// XOR superposition of bindings. `arity` is bookkeeping only; the value
/// cannot confirm it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bundle {
    pub value: Hypervector,
    pub arity: usize,
}

impl Bundle {
    pub fn empty(cfg: &BlockPolynomialConfig) -> Self {
        Bundle {
            value: cfg.zero(),
            arity: 0,
        }
    }

    /// XORs one more binding in.
    pub fn absorb(&mut self, cfg: &BlockPolynomialConfig, role: &Hypervector, filler: &Hypervector) -> Result<()> {
        let b = bind(cfg, role, filler)?;
        self.value.xor_assign(&b)?;
        self.arity += 1;
        Ok(())
    }

    /// XORs a binding back out (exact inverse of `absorb`).
    pub fn release(&mut self, cfg: &BlockPolynomialConfig, role: &Hypervector, filler: &Hypervector) -> Result<()> {
        let b = bind(cfg, role, filler)?;
        self.value.xor_assign(&b)?;
        self.arity = self.arity.saturating_sub(1);
        Ok(())
    }
}

pub fn bind(cfg: &BlockPolynomialConfig, role: &Hypervector, filler: &Hypervector) -> Result<Hypervector> {
    role.xor(&cfg.shift(filler)?)
}

pub fn unbind(cfg: &BlockPolynomialConfig, bound: &Hypervector, role: &Hypervector) -> Result<Hypervector> {
    cfg.shift_inv(&bound.xor(role)?)
}

pub fn bundle(cfg: &BlockPolynomialConfig, pairs: &[RoleFillerPair]) -> Result<Bundle> {
    let mut out = Bundle::empty(cfg);
    for p in pairs {
        out.absorb(cfg, &p.role, &p.filler)?;
    }
    Ok(out)
}

/// `F_j ^ xi_j` where `xi_j` is the unbound residue of every other term.
/// No cleanup is applied.
pub fn unbind_from_bundle(cfg: &BlockPolynomialConfig, s: &Bundle, role: &Hypervector) -> Result<Hypervector> {
    unbind(cfg, &s.value, role)
}

/// Replaces the filler of `role` from `old` to `new`.
///
/// The caller vouches that `(role, old)` is a constituent. The bundle changes
/// by exactly `shift(old ^ new)`.
pub fn intervene(
    cfg: &BlockPolynomialConfig,
    s: &Bundle,
    role: &Hypervector,
    old: &Hypervector,
    new: &Hypervector,
) -> Result<Bundle> {
    let mut value = s.value.xor(&bind(cfg, role, old)?)?;
    value.xor_assign(&bind(cfg, role, new)?)?;
    Ok(Bundle {
        value,
        arity: s.arity,
    })
}

/// Cast of the Lover/Beloved cycle, in order.
pub const SOAP_OPERA_CAST: [&str; 8] = ["Amy", "Billy", "Clara", "David", "Emma", "Frank", "Grace", "Henry"];

/// The eight-fact Lover/Beloved cycle.
///
/// `facts[i] = bind(Lover, P_i) ^ bind(Beloved, P_{i+1})` with the cast
/// wrapping so that Henry loves Amy; `story` is their XOR.
#[derive(Clone, Debug)]
pub struct SoapOpera {
    pub lover: Hypervector,
    pub beloved: Hypervector,
    pub people: Vec<(String, Hypervector)>,
    pub facts: Vec<Bundle>,
    pub story: Bundle,
    /// `(lover, beloved)` per fact.
    pub expected: Vec<(String, String)>,
}

impl SoapOpera {
    pub fn build(cfg: &BlockPolynomialConfig) -> Result<Self> {
        let lover = cfg.item_vector(b"Lover")?;
        let beloved = cfg.item_vector(b"Beloved")?;
        let people = SOAP_OPERA_CAST
            .iter()
            .map(|name| Ok((name.to_string(), cfg.item_vector(name.as_bytes())?)))
            .collect::<Result<Vec<_>>>()?;
        let n = people.len();
        let mut facts = Vec::with_capacity(n);
        let mut expected = Vec::with_capacity(n);
        let mut story = Bundle::empty(cfg);
        for i in 0..n {
            let (ref who, ref a) = people[i];
            let (ref whom, ref b) = people[(i + 1) % n];
            let fact = bundle(
                cfg,
                &[
                    RoleFillerPair::new(lover.clone(), a.clone()),
                    RoleFillerPair::new(beloved.clone(), b.clone()),
                ],
            )?;
            story.value.xor_assign(&fact.value)?;
            story.arity += fact.arity;
            facts.push(fact);
            expected.push((who.clone(), whom.clone()));
        }
        Ok(SoapOpera {
            lover,
            beloved,
            people,
            facts,
            story,
            expected,
        })
    }

    /// `S ^ L_1 ^ ... ^ L_{n-1}`: the story with every fact but the last
    /// cancelled out.
    pub fn closure_residue(&self) -> Result<Hypervector> {
        let mut residue = self.story.value.clone();
        for fact in &self.facts[..self.facts.len() - 1] {
            residue.xor_assign(&fact.value)?;
        }
        Ok(residue)
    }
}

/// `bind(Inner, book) ^ bind(Outer, table)` and the role-swapped
/// `bind(Inner, table) ^ bind(Outer, book)`.
pub fn book_table_bundles(
    cfg: &BlockPolynomialConfig,
    inner: &Hypervector,
    outer: &Hypervector,
    book: &Hypervector,
    table: &Hypervector,
) -> Result<(Bundle, Bundle)> {
    let on = bundle(
        cfg,
        &[
            RoleFillerPair::new(inner.clone(), book.clone()),
            RoleFillerPair::new(outer.clone(), table.clone()),
        ],
    )?;
    let swapped = bundle(
        cfg,
        &[
            RoleFillerPair::new(inner.clone(), table.clone()),
            RoleFillerPair::new(outer.clone(), book.clone()),
        ],
    )?;
    Ok((on, swapped))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf2::Gf2Poly;
    use crate::hypervector::BlockSpec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn q4() -> BlockPolynomialConfig {
        BlockPolynomialConfig::from_blocks(
            4,
            1,
            vec![BlockSpec {
                generator: Gf2Poly::from_mask(0x13).unwrap(),
                seed: 0,
            }],
        )
        .unwrap()
    }

    fn hv(cfg: &BlockPolynomialConfig, s: u32) -> Hypervector {
        cfg.hypervector(vec![s]).unwrap()
    }

    #[test]
    fn bind_by_hand() {
        let cfg = q4();
        assert_eq!(bind(&cfg, &hv(&cfg, 0b1010), &hv(&cfg, 0b0001)).unwrap(), hv(&cfg, 0b1000));
        assert!(bind(&cfg, &cfg.zero(), &cfg.zero()).unwrap().is_zero());
        assert_eq!(unbind(&cfg, &hv(&cfg, 0b1000), &hv(&cfg, 0b1010)).unwrap(), hv(&cfg, 0b0001));
    }

    #[test]
    fn q4_exhaustive_laws() {
        let cfg = q4();
        let zero = cfg.zero();
        for r in 0..16 {
            for f in 0..16 {
                let (rv, fv) = (hv(&cfg, r), hv(&cfg, f));
                let b = bind(&cfg, &rv, &fv).unwrap();
                assert_eq!(unbind(&cfg, &b, &rv).unwrap(), fv);
                for f2 in 0..16 {
                    let f2v = hv(&cfg, f2);
                    let lhs = bind(&cfg, &rv, &fv.xor(&f2v).unwrap()).unwrap();
                    let rhs = b.xor(&bind(&cfg, &zero, &f2v).unwrap()).unwrap();
                    assert_eq!(lhs, rhs);
                }
                for r2 in 0..16 {
                    let r2v = hv(&cfg, r2);
                    // wrong-role expansion: f ^ shift^-1(r ^ r2)
                    let expected = fv.xor(&cfg.shift_inv(&rv.xor(&r2v).unwrap()).unwrap()).unwrap();
                    let got = unbind(&cfg, &b, &r2v).unwrap();
                    assert_eq!(got, expected);
                    assert_eq!(got == fv, r == r2);
                }
                let swapped = bind(&cfg, &fv, &rv).unwrap();
                assert_eq!(b == swapped, r == f);
            }
        }
    }

    #[test]
    fn bundle_basics() {
        let cfg = BlockPolynomialConfig::named("default", 1).unwrap();
        assert_eq!(bundle(&cfg, &[]).unwrap(), Bundle::empty(&cfg));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pairs: Vec<_> = (0..5)
            .map(|_| RoleFillerPair::new(cfg.random(&mut rng), cfg.random(&mut rng)))
            .collect();
        let one = bundle(&cfg, &pairs[..1]).unwrap();
        assert_eq!(one.value, bind(&cfg, &pairs[0].role, &pairs[0].filler).unwrap());
        assert_eq!(unbind_from_bundle(&cfg, &one, &pairs[0].role).unwrap(), pairs[0].filler);
        let forward = bundle(&cfg, &pairs).unwrap();
        let mut reversed = pairs.clone();
        reversed.reverse();
        assert_eq!(forward, bundle(&cfg, &reversed).unwrap());
        assert_eq!(forward.arity, 5);
    }

    #[test]
    fn crosstalk_identity_exhaustive_q4() {
        let cfg = q4();
        for r1 in 0..16 {
            for f1 in 0..16 {
                for r2 in (0..16).step_by(3) {
                    for f2 in (0..16).step_by(5) {
                        let p1 = RoleFillerPair::new(hv(&cfg, r1), hv(&cfg, f1));
                        let p2 = RoleFillerPair::new(hv(&cfg, r2), hv(&cfg, f2));
                        let s = bundle(&cfg, &[p1.clone(), p2.clone()]).unwrap();
                        let got = unbind_from_bundle(&cfg, &s, &p1.role).unwrap();
                        let rest = bind(&cfg, &p2.role, &p2.filler).unwrap();
                        assert_eq!(got.xor(&p1.filler).unwrap(), cfg.shift_inv(&rest).unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn crosstalk_leaves_no_similarity_to_the_filler() {
        // Measured: with k=3 the raw readout sits at the random-pair distance.
        let cfg = BlockPolynomialConfig::named("default", 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut total = 0.0;
        for _ in 0..200 {
            let pairs: Vec<_> = (0..3)
                .map(|_| RoleFillerPair::new(cfg.random(&mut rng), cfg.random(&mut rng)))
                .collect();
            let s = bundle(&cfg, &pairs).unwrap();
            let got = unbind_from_bundle(&cfg, &s, &pairs[0].role).unwrap();
            total += got.hamming(&pairs[0].filler).unwrap() as f64 / 1024.0;
        }
        let mean = total / 200.0;
        assert!((0.48..=0.52).contains(&mean), "mean={mean}");
    }

    #[test]
    fn bundle_depends_only_on_role_and_filler_sums() {
        let cfg = BlockPolynomialConfig::named("default", 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let pairs: Vec<_> = (0..4)
                .map(|_| RoleFillerPair::new(cfg.random(&mut rng), cfg.random(&mut rng)))
                .collect();
            let mut roles = cfg.zero();
            let mut fillers = cfg.zero();
            for p in &pairs {
                roles.xor_assign(&p.role).unwrap();
                fillers.xor_assign(&p.filler).unwrap();
            }
            let s = bundle(&cfg, &pairs).unwrap();
            assert_eq!(s.value, roles.xor(&cfg.shift(&fillers).unwrap()).unwrap());
        }
    }

    #[test]
    fn role_swap_yields_the_same_bundle() {
        let cfg = BlockPolynomialConfig::named("default", 7).unwrap();
        let [inner, outer, book, table] =
            ["Inner", "Outer", "Book", "Table"].map(|t| cfg.item_vector(t.as_bytes()).unwrap());
        let (on, swapped) = book_table_bundles(&cfg, &inner, &outer, &book, &table).unwrap();
        assert_eq!(on.value.hamming(&swapped.value).unwrap(), 0);
    }

    #[test]
    fn argument_swap_changes_the_bundle() {
        let cfg = BlockPolynomialConfig::named("default", 7).unwrap();
        let [inner, outer, book, table] =
            ["Inner", "Outer", "Book", "Table"].map(|t| cfg.item_vector(t.as_bytes()).unwrap());
        let a = bundle(
            &cfg,
            &[
                RoleFillerPair::new(inner.clone(), book.clone()),
                RoleFillerPair::new(outer.clone(), table.clone()),
            ],
        )
        .unwrap();
        let b = bundle(&cfg, &[RoleFillerPair::new(book, inner), RoleFillerPair::new(table, outer)]).unwrap();
        assert!(a.value.hamming(&b.value).unwrap() > 0);
    }

    #[test]
    fn intervention_identities() {
        let cfg = BlockPolynomialConfig::named("default", 5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let pairs: Vec<_> = (0..4)
            .map(|_| RoleFillerPair::new(cfg.random(&mut rng), cfg.random(&mut rng)))
            .collect();
        let s = bundle(&cfg, &pairs).unwrap();
        let new = cfg.random(&mut rng);
        let (r, old) = (&pairs[2].role, &pairs[2].filler);
        let s2 = intervene(&cfg, &s, r, old, &new).unwrap();
        assert_eq!(s2.arity, s.arity);
        assert_eq!(
            s2.value.xor(&s.value).unwrap(),
            cfg.shift(&old.xor(&new).unwrap()).unwrap()
        );
        assert_eq!(intervene(&cfg, &s2, r, &new, old).unwrap(), s);
        assert_eq!(intervene(&cfg, &s, r, old, old).unwrap(), s);
        let mut rebuilt = pairs.clone();
        rebuilt[2].filler = new.clone();
        assert_eq!(bundle(&cfg, &rebuilt).unwrap(), s2);
        let single = bundle(&cfg, &pairs[..1]).unwrap();
        let moved = intervene(&cfg, &single, &pairs[0].role, &pairs[0].filler, &new).unwrap();
        assert_eq!(unbind_from_bundle(&cfg, &moved, &pairs[0].role).unwrap(), new);
    }

    #[test]
    fn soap_opera_structure() {
        let cfg = BlockPolynomialConfig::named("default", 7).unwrap();
        let so = SoapOpera::build(&cfg).unwrap();
        assert_eq!(so.facts.len(), 8);
        assert_eq!(so.expected[7], ("Henry".to_string(), "Amy".to_string()));
        assert_eq!(so.closure_residue().unwrap(), so.facts[7].value);
        // every role appears 8 times and every person twice
        assert!(so.story.value.is_zero());
        assert_eq!(so.story.arity, 16);
    }
}
