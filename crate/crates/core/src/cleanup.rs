//! Cleanup memory: block-wise majority-vote readout with confidence ratios.

use indexmap::IndexMap;

use crate::error::{Error, Result};
use crate::hypervector::{BlockPolynomialConfig, Hypervector};

const MEMORY_MAGIC: &str = "#gf2hdc-memory v1";

/// Outcome of one readout.
///
/// `cr1` is the winner's block votes over `N`; blocks with a tied minimum
/// distance abstain and count against it.
#[derive(Clone, Debug, PartialEq)]
pub struct ReadoutResult {
    pub winner: String,
    /// Block votes per candidate, in vocabulary order.
    pub votes: Vec<(String, usize)>,
    pub cr1: f64,
    /// Winner votes minus runner-up votes.
    pub margin: usize,
    pub abstentions: usize,
}

impl ReadoutResult {
    pub fn winner_votes(&self) -> usize {
        self.votes
            .iter()
            .find(|(t, _)| *t == self.winner)
            .map_or(0, |(_, v)| *v)
    }

    pub fn votes_for(&self, token: &str) -> Option<usize> {
        self.votes.iter().find(|(t, _)| t == token).map(|(_, v)| *v)
    }
}

/// A chain of readouts; `cr2` is the product of their `cr1`.
#[derive(Clone, Debug, PartialEq)]
pub struct Cr2Trace {
    pub steps: Vec<ReadoutResult>,
    pub cr2: f64,
}

impl Default for Cr2Trace {
    fn default() -> Self {
        Cr2Trace {
            steps: Vec::new(),
            cr2: 1.0,
        }
    }
}

impl Cr2Trace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn extend(&self, r: ReadoutResult) -> Cr2Trace {
        let mut next = self.clone();
        next.push(r);
        next
    }

    pub fn push(&mut self, r: ReadoutResult) {
        self.cr2 *= r.cr1;
        self.steps.push(r);
    }
}

/// Named vocabulary, iterated in insertion order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CleanupMemory {
    config_id: u64,
    entries: IndexMap<String, Hypervector>,
}

impl CleanupMemory {
    pub fn new(cfg: &BlockPolynomialConfig) -> Self {
        CleanupMemory {
            config_id: cfg.config_id(),
            entries: IndexMap::new(),
        }
    }

    /// Vocabulary of `item_vector(token)` for each token.
    pub fn from_tokens<'a>(cfg: &BlockPolynomialConfig, tokens: impl IntoIterator<Item = &'a str>) -> Result<Self> {
        let mut m = Self::new(cfg);
        for t in tokens {
            m.add_entry(t, cfg.item_vector(t.as_bytes())?)?;
        }
        Ok(m)
    }

    pub fn config_id(&self) -> u64 {
        self.config_id
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, token: &str) -> Option<&Hypervector> {
        self.entries.get(token)
    }

    pub fn contains(&self, token: &str) -> bool {
        self.entries.contains_key(token)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Hypervector)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn add_entry(&mut self, token: &str, v: Hypervector) -> Result<()> {
        validate_token(token)?;
        if v.config_id() != self.config_id {
            return Err(Error::ConfigMismatch {
                expected: self.config_id,
                found: v.config_id(),
            });
        }
        if self.entries.contains_key(token) {
            return Err(Error::DuplicateToken(token.to_string()));
        }
        self.entries.insert(token.to_string(), v);
        Ok(())
    }

    pub fn remove_entry(&mut self, token: &str) -> Result<Hypervector> {
        self.entries
            .shift_remove(token)
            .ok_or_else(|| Error::UnknownToken(token.to_string()))
    }

    /// Block-wise majority vote: each block votes for the unique candidate
    /// nearest to the query in that block, or abstains on a tie.
    pub fn cleanup(&self, query: &Hypervector) -> Result<ReadoutResult> {
        if self.entries.is_empty() {
            return Err(Error::EmptyVocabulary);
        }
        if query.config_id() != self.config_id {
            return Err(Error::ConfigMismatch {
                expected: self.config_id,
                found: query.config_id(),
            });
        }
        let candidates: Vec<&[u32]> = self.entries.values().map(|v| v.blocks()).collect();
        let n = query.blocks().len();
        let mut votes = vec![0usize; candidates.len()];
        let mut abstentions = 0;
        for (b, &qb) in query.blocks().iter().enumerate() {
            let mut best = u32::MAX;
            let mut best_idx = 0;
            let mut tied = false;
            for (i, c) in candidates.iter().enumerate() {
                let d = (c[b] ^ qb).count_ones();
                if d < best {
                    best = d;
                    best_idx = i;
                    tied = false;
                } else if d == best {
                    tied = true;
                }
            }
            if tied {
                abstentions += 1;
            } else {
                votes[best_idx] += 1;
            }
        }
        let top = *votes.iter().max().expect("nonempty");
        let leaders: Vec<usize> = (0..votes.len()).filter(|&i| votes[i] == top).collect();
        let tokens: Vec<&String> = self.entries.keys().collect();
        if leaders.len() > 1 {
            return Err(Error::TiedWinner {
                tokens: leaders.iter().map(|&i| tokens[i].clone()).collect(),
                votes: top,
            });
        }
        let winner = leaders[0];
        let runner_up = votes
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != winner)
            .map(|(_, &v)| v)
            .max()
            .unwrap_or(0);
        Ok(ReadoutResult {
            winner: tokens[winner].clone(),
            votes: tokens.iter().map(|t| (*t).clone()).zip(votes.iter().copied()).collect(),
            cr1: top as f64 / n as f64,
            margin: top - runner_up,
            abstentions,
        })
    }

    /// Header lines carry the config serialization; one `token<TAB>hex`
    /// record per entry follows.
    pub fn to_text(&self, cfg: &BlockPolynomialConfig) -> Result<String> {
        if cfg.config_id() != self.config_id {
            return Err(Error::ConfigMismatch {
                expected: self.config_id,
                found: cfg.config_id(),
            });
        }
        let mut out = String::from(MEMORY_MAGIC);
        out.push('\n');
        for line in cfg.to_text_format().lines() {
            out.push_str("#| ");
            out.push_str(line);
            out.push('\n');
        }
        for (token, v) in &self.entries {
            out.push_str(token);
            out.push('\t');
            out.push_str(&cfg.encode_hex(v)?);
            out.push('\n');
        }
        Ok(out)
    }

    /// Parses a memory file, returning the embedded config alongside it.
    pub fn from_text(text: &str) -> Result<(BlockPolynomialConfig, CleanupMemory)> {
        let mut lines = text.lines();
        if lines.next() != Some(MEMORY_MAGIC) {
            return Err(Error::parse(format!("missing `{MEMORY_MAGIC}` header")));
        }
        let mut config_text = String::new();
        let mut records = Vec::new();
        for line in lines {
            if let Some(c) = line.strip_prefix("#| ") {
                config_text.push_str(c);
                config_text.push('\n');
            } else if !line.is_empty() {
                records.push(line);
            }
        }
        let cfg = BlockPolynomialConfig::parse_text_format(&config_text)?;
        let mut m = CleanupMemory::new(&cfg);
        for rec in records {
            let (token, hex) = rec
                .split_once('\t')
                .ok_or_else(|| Error::parse(format!("record without tab: `{rec}`")))?;
            m.add_entry(token, cfg.decode_hex(hex)?)?;
        }
        Ok((cfg, m))
    }

    /// As `from_text`, but the file must belong to `cfg`.
    pub fn from_text_for(cfg: &BlockPolynomialConfig, text: &str) -> Result<CleanupMemory> {
        let (embedded, m) = Self::from_text(text)?;
        if embedded.config_id() != cfg.config_id() {
            return Err(Error::ConfigMismatch {
                expected: cfg.config_id(),
                found: embedded.config_id(),
            });
        }
        Ok(m)
    }
}

pub(crate) fn validate_token(token: &str) -> Result<()> {
    if token.is_empty() {
        return Err(Error::EmptyToken);
    }
    if token.chars().any(|c| c.is_control() || c.is_whitespace()) {
        return Err(Error::parse(format!("token `{}` contains whitespace or control characters", token.escape_debug())));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{unbind, SoapOpera, SOAP_OPERA_CAST};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cfg() -> BlockPolynomialConfig {
        BlockPolynomialConfig::named("default", 7).unwrap()
    }

    #[test]
    fn exact_query_wins_with_full_confidence() {
        let cfg = cfg();
        let m = CleanupMemory::from_tokens(&cfg, SOAP_OPERA_CAST).unwrap();
        for name in SOAP_OPERA_CAST {
            let r = m.cleanup(m.get(name).unwrap()).unwrap();
            assert_eq!(r.winner, name);
            assert_eq!(r.cr1, 1.0);
            assert_eq!(r.abstentions, 0);
        }
    }

    #[test]
    fn lone_candidate_takes_every_block() {
        let cfg = cfg();
        let m = CleanupMemory::from_tokens(&cfg, ["only"]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let r = m.cleanup(&cfg.random(&mut rng)).unwrap();
        assert_eq!(r.winner, "only");
        assert_eq!(r.cr1, 1.0);
        assert_eq!(r.margin, 64);
    }

    #[test]
    fn empty_and_mismatched() {
        let cfg = cfg();
        let m = CleanupMemory::new(&cfg);
        assert!(matches!(m.cleanup(&cfg.zero()), Err(Error::EmptyVocabulary)));
        let other = BlockPolynomialConfig::named("default", 8).unwrap();
        let m = CleanupMemory::from_tokens(&cfg, ["a"]).unwrap();
        assert!(matches!(m.cleanup(&other.zero()), Err(Error::ConfigMismatch { .. })));
    }

    #[test]
    fn identical_entries_tie() {
        let cfg = cfg();
        let mut m = CleanupMemory::new(&cfg);
        let v = cfg.item_vector(b"twin").unwrap();
        m.add_entry("a", v.clone()).unwrap();
        m.add_entry("b", v.clone()).unwrap();
        assert!(matches!(m.cleanup(&v), Err(Error::TiedWinner { votes: 0, .. })));
    }

    #[test]
    fn cr2_arithmetic() {
        let t = Cr2Trace::new();
        assert_eq!(t.cr2, 1.0);
        let mk = |cr1: f64| ReadoutResult {
            winner: "x".into(),
            votes: vec![],
            cr1,
            margin: 0,
            abstentions: 0,
        };
        let t = t.extend(mk(0.9)).extend(mk(0.8));
        assert!((t.cr2 - 0.72).abs() < 1e-12);
        let ones = Cr2Trace::new().extend(mk(1.0)).extend(mk(1.0));
        assert_eq!(ones.cr2, 1.0);
    }

    #[test]
    fn add_remove_entries() {
        let cfg = cfg();
        let mut m = CleanupMemory::from_tokens(&cfg, ["a", "b", "c"]).unwrap();
        assert!(matches!(m.add_entry("a", cfg.zero()), Err(Error::DuplicateToken(_))));
        assert!(m.add_entry("bad token", cfg.zero()).is_err());
        let fresh = cfg.item_vector(b"d").unwrap();
        m.add_entry("d", fresh.clone()).unwrap();
        assert_eq!(m.cleanup(&fresh).unwrap().winner, "d");

        // 40 blocks copied from `a`, 24 from `b`
        let (a, b) = (m.get("a").unwrap(), m.get("b").unwrap());
        let blocks: Vec<u32> = (0..64).map(|i| if i < 40 { a.block(i) } else { b.block(i) }).collect();
        let q = cfg.hypervector(blocks).unwrap();
        let first = m.cleanup(&q).unwrap();
        assert_eq!(first.winner, "a");
        assert_eq!(first.margin, 40 - first.votes_for("b").unwrap());
        m.remove_entry("a").unwrap();
        assert_eq!(m.cleanup(&q).unwrap().winner, "b");
        assert!(m.remove_entry("a").is_err());
    }

    #[test]
    fn thousand_additions_leave_readout_unchanged() {
        let cfg = cfg();
        let mut m = CleanupMemory::from_tokens(&cfg, SOAP_OPERA_CAST).unwrap();
        let q = m.get("Clara").unwrap().clone();
        let before = m.cleanup(&q).unwrap();
        let snapshot: Vec<_> = m.iter().map(|(t, v)| (t.to_string(), v.clone())).collect();
        for i in 0..1000 {
            m.add_entry(&format!("extra{i}"), cfg.item_vector(format!("extra{i}").as_bytes()).unwrap())
                .unwrap();
        }
        for (t, v) in &snapshot {
            assert_eq!(m.get(t).unwrap(), v);
        }
        let after = m.cleanup(&q).unwrap();
        assert_eq!(after.winner, before.winner);
        assert_eq!(after.cr1, before.cr1);
    }

    #[test]
    fn new_entry_only_takes_votes_away() {
        let cfg = cfg();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for trial in 0..50 {
            let mut m = CleanupMemory::new(&cfg);
            for i in 0..6 {
                m.add_entry(&format!("t{i}"), cfg.random(&mut rng)).unwrap();
            }
            let q = cfg.random(&mut rng);
            let tally = |m: &CleanupMemory| -> Vec<usize> {
                // recompute votes without the tie-at-top error
                let mut votes = vec![0; m.len()];
                for b in 0..cfg.block_count() {
                    let d: Vec<u32> = m.iter().map(|(_, v)| (v.block(b) ^ q.block(b)).count_ones()).collect();
                    let min = *d.iter().min().unwrap();
                    let at_min: Vec<usize> = (0..d.len()).filter(|&i| d[i] == min).collect();
                    if at_min.len() == 1 {
                        votes[at_min[0]] += 1;
                    }
                }
                votes
            };
            let old = tally(&m);
            m.add_entry("fresh", cfg.random(&mut rng)).unwrap();
            let new = tally(&m);
            for i in 0..old.len() {
                assert!(new[i] <= old[i], "trial {trial}: candidate {i} gained votes");
            }
        }
    }

    #[test]
    fn soap_opera_readout_of_closure_fact() {
        // Documents measured behaviour: the directional readout carries no
        // signal, so the winner is not reliably Henry.
        let cfg = cfg();
        let so = SoapOpera::build(&cfg).unwrap();
        let m = CleanupMemory::from_tokens(&cfg, SOAP_OPERA_CAST).unwrap();
        let q = unbind(&cfg, &so.closure_residue().unwrap(), &so.lover).unwrap();
        let henry = m.get("Henry").unwrap();
        let amy = m.get("Amy").unwrap();
        let beloved_residue = cfg.shift_inv(&so.beloved).unwrap();
        assert_eq!(q, henry.xor(amy).unwrap().xor(&beloved_residue).unwrap());
        if let Ok(r) = m.cleanup(&q) {
            assert!(r.cr1 < 0.5);
        }
    }

    #[test]
    fn persistence_roundtrip() {
        let cfg = cfg();
        let m = CleanupMemory::from_tokens(&cfg, SOAP_OPERA_CAST).unwrap();
        let text = m.to_text(&cfg).unwrap();
        let (cfg2, m2) = CleanupMemory::from_text(&text).unwrap();
        assert_eq!(cfg2, cfg);
        assert_eq!(m2, m);
        assert_eq!(m2.to_text(&cfg2).unwrap(), text);
        let other = BlockPolynomialConfig::named("default", 9).unwrap();
        assert!(CleanupMemory::from_text_for(&other, &text).is_err());
        assert!(CleanupMemory::from_text_for(&cfg, &text).is_ok());
    }
}
