//! Reading and writing the published 3×3 challenge matrices over `Z_2[S_5]`.
//!
//! Files hold one `a_{RC} = element` assignment per logical line. A line
//! ending in `+` continues on the next one.

use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::matrix::MatrixGR;
use crate::ring::{GroupRingElement, RingContext};

pub const CHALLENGE_MODULUS: u32 = 2;
pub const CHALLENGE_DEGREE: usize = 5;
pub const CHALLENGE_DIM: usize = 3;

const PUBLISHED_M: &str = include_str!("../data/challenge/M.txt");
const PUBLISHED_MA: &str = include_str!("../data/challenge/Ma.txt");
const PUBLISHED_MB: &str = include_str!("../data/challenge/Mb.txt");

pub fn challenge_context() -> Result<Arc<RingContext>> {
    RingContext::new(CHALLENGE_MODULUS, CHALLENGE_DEGREE)
}

fn logical_lines(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut pending = String::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() && pending.is_empty() {
            continue;
        }
        pending.push_str(line);
        if !line.ends_with('+') {
            out.push(std::mem::take(&mut pending));
        }
    }
    if !pending.is_empty() {
        out.push(pending);
    }
    out
}

fn parse_label(label: &str) -> Result<(usize, usize)> {
    let bad = || Error::Challenge(format!("bad entry label {label:?}"));
    let digits = label
        .strip_prefix("a_{")
        .and_then(|s| s.strip_suffix('}'))
        .or_else(|| label.strip_prefix("a_"))
        .ok_or_else(bad)?;
    let mut chars = digits.chars();
    let (Some(r), Some(c), None) = (chars.next(), chars.next(), chars.next()) else {
        return Err(bad());
    };
    let (Some(r), Some(c)) = (r.to_digit(10), c.to_digit(10)) else {
        return Err(bad());
    };
    let (r, c) = (r as usize, c as usize);
    if !(1..=CHALLENGE_DIM).contains(&r) || !(1..=CHALLENGE_DIM).contains(&c) {
        return Err(Error::Challenge(format!(
            "entry a_{{{r}{c}}} outside a 3×3 matrix"
        )));
    }
    Ok((r - 1, c - 1))
}

/// Parses the nine assignments, in any order, into a matrix over `Z_2[S_5]`.
pub fn parse_matrix(text: &str) -> Result<MatrixGR> {
    let ctx = challenge_context()?;
    let mut slots: Vec<Option<GroupRingElement>> = vec![None; CHALLENGE_DIM * CHALLENGE_DIM];
    for line in logical_lines(text) {
        let (label, element) = line
            .split_once('=')
            .ok_or_else(|| Error::Challenge(format!("missing '=' in {line:?}")))?;
        let (r, c) = parse_label(label.trim())?;
        let slot = &mut slots[r * CHALLENGE_DIM + c];
        if slot.is_some() {
            return Err(Error::Challenge(format!(
                "duplicate entry a_{{{}{}}}",
                r + 1,
                c + 1
            )));
        }
        *slot = Some(GroupRingElement::parse(element, &ctx)?);
    }
    let mut entries = Vec::with_capacity(slots.len());
    for (i, slot) in slots.into_iter().enumerate() {
        let (r, c) = (i / CHALLENGE_DIM + 1, i % CHALLENGE_DIM + 1);
        entries.push(slot.ok_or_else(|| Error::Challenge(format!("missing entry a_{{{r}{c}}}")))?);
    }
    MatrixGR::from_entries(&ctx, CHALLENGE_DIM, &entries)
}

/// Canonical text: entries column by column as in the published files, terms
/// in rank order, identity written `ε`, one line per entry.
pub fn format_matrix(m: &MatrixGR) -> Result<String> {
    if m.dim() != CHALLENGE_DIM || !m.context().same_ring(&*challenge_context()?) {
        return Err(Error::Challenge(format!(
            "expected a 3×3 matrix over Z_2[S_5], got {}×{} over {:?}",
            m.dim(),
            m.dim(),
            m.context()
        )));
    }
    let mut out = String::new();
    for c in 0..CHALLENGE_DIM {
        for r in 0..CHALLENGE_DIM {
            let entry = m.entry(r, c).to_string();
            let entry = entry
                .split('+')
                .map(|t| if t == "e" { "ε" } else { t })
                .collect::<Vec<_>>()
                .join("+");
            writeln!(out, "a_{{{}{}}} = {entry}", r + 1, c + 1).expect("writing to a String");
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ChallengeWarning {
    /// Two of the three matrices are equal.
    Duplicate(&'static str, &'static str),
}

impl std::fmt::Display for ChallengeWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Duplicate(x, y) => write!(f, "{x} and {y} are identical"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ChallengeSet {
    pub m: MatrixGR,
    pub ma: MatrixGR,
    pub mb: MatrixGR,
    pub warnings: Vec<ChallengeWarning>,
}

impl PartialEq for ChallengeSet {
    fn eq(&self, other: &Self) -> bool {
        self.m == other.m && self.ma == other.ma && self.mb == other.mb
    }
}

impl ChallengeSet {
    pub fn new(m: MatrixGR, ma: MatrixGR, mb: MatrixGR) -> Self {
        let mut warnings = Vec::new();
        for (x, y, a, b) in [
            ("M", "Ma", &m, &ma),
            ("M", "Mb", &m, &mb),
            ("Ma", "Mb", &ma, &mb),
        ] {
            if a == b {
                warnings.push(ChallengeWarning::Duplicate(x, y));
            }
        }
        Self {
            m,
            ma,
            mb,
            warnings,
        }
    }

    pub fn parse(m: &str, ma: &str, mb: &str) -> Result<Self> {
        Ok(Self::new(
            parse_matrix(m)?,
            parse_matrix(ma)?,
            parse_matrix(mb)?,
        ))
    }

    pub fn load(m: impl AsRef<Path>, ma: impl AsRef<Path>, mb: impl AsRef<Path>) -> Result<Self> {
        let read = |p: &Path| std::fs::read_to_string(p);
        Self::parse(&read(m.as_ref())?, &read(ma.as_ref())?, &read(mb.as_ref())?)
    }

    /// The matrices as published, bundled at build time.
    pub fn published() -> Result<Self> {
        Self::parse(PUBLISHED_M, PUBLISHED_MA, PUBLISHED_MB)
    }

    pub fn format(&self) -> Result<[String; 3]> {
        Ok([
            format_matrix(&self.m)?,
            format_matrix(&self.ma)?,
            format_matrix(&self.mb)?,
        ])
    }

    pub fn is_distinct(&self) -> bool {
        self.warnings.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn identity_entries() -> String {
        let mut s = String::new();
        for r in 1..=3 {
            for c in 1..=3 {
                writeln!(s, "a_{{{r}{c}}} = ε").unwrap();
            }
        }
        s
    }

    #[test]
    fn published_matrices_parse_with_binary_coefficients() {
        let set = ChallengeSet::published().unwrap();
        for m in [&set.m, &set.ma, &set.mb] {
            assert!(m.coeffs().iter().all(|&c| c <= 1));
            assert!(!m.coeffs().iter().all(|&c| c == 0));
        }
    }

    #[test]
    fn published_corpus_warns_on_duplicate() {
        let set = ChallengeSet::published().unwrap();
        assert_ne!(set.m, set.ma);
        assert_eq!(set.ma, set.mb);
        assert_eq!(set.warnings, vec![ChallengeWarning::Duplicate("Ma", "Mb")]);
    }

    #[test]
    fn first_entry_matches_the_published_text() {
        let set = ChallengeSet::published().unwrap();
        let ctx = challenge_context().unwrap();
        let first = PUBLISHED_M
            .lines()
            .next()
            .unwrap()
            .split_once('=')
            .unwrap()
            .1;
        let terms = first.split('+').count();
        let a11 = set.m.entry(0, 0);
        assert_eq!(a11, GroupRingElement::parse(first, &ctx).unwrap());
        assert_eq!(a11.support_size(), terms);
        assert_eq!(a11.coeffs()[0], 1);
    }

    #[test]
    fn canonical_text_round_trips() {
        let set = ChallengeSet::published().unwrap();
        let texts = set.format().unwrap();
        let again = ChallengeSet::parse(&texts[0], &texts[1], &texts[2]).unwrap();
        assert_eq!(again, set);
        assert_eq!(again.format().unwrap(), texts);
        assert_eq!(again.warnings, set.warnings);
    }

    #[test]
    fn random_matrices_round_trip() {
        let ctx = challenge_context().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let x = MatrixGR::random(&ctx, 3, &mut rng);
            assert_eq!(parse_matrix(&format_matrix(&x).unwrap()).unwrap(), x);
        }
    }

    #[test]
    fn identity_entries_give_single_terms() {
        let m = parse_matrix(&identity_entries()).unwrap();
        for r in 0..3 {
            for c in 0..3 {
                let e = m.entry(r, c);
                assert_eq!(e.support_size(), 1);
                assert_eq!(e.coeffs()[0], 1);
            }
        }
    }

    #[test]
    fn order_and_spelling_do_not_matter() {
        let lines: Vec<_> = identity_entries()
            .lines()
            .rev()
            .map(str::to_owned)
            .collect();
        let mut text = lines
            .join("\n")
            .replacen("ε", "\\epsilon", 1)
            .replacen("ε", "e", 1);
        text.push('\n');
        assert_eq!(
            parse_matrix(&text).unwrap(),
            parse_matrix(&identity_entries()).unwrap()
        );
    }

    #[test]
    fn continuation_lines_join() {
        let text = identity_entries().replacen("a_{11} = ε", "a_{11} = ε+\n  (1 2)+\n(3 4 5)", 1);
        let m = parse_matrix(&text).unwrap();
        assert_eq!(m.entry(0, 0).support_size(), 3);
    }

    #[test]
    fn malformed_files_are_rejected() {
        let full = identity_entries();
        let missing: String = full.lines().skip(1).map(|l| format!("{l}\n")).collect();
        assert!(matches!(parse_matrix(&missing), Err(Error::Challenge(_))));
        let dup = format!("{full}a_{{22}} = ε\n");
        assert!(matches!(parse_matrix(&dup), Err(Error::Challenge(_))));
        let out_of_range = full.replacen("a_{11} = ε", "a_{11} = (1 6)", 1);
        assert!(parse_matrix(&out_of_range).is_err());
        let bad_label = full.replacen("a_{11}", "a_{41}", 1);
        assert!(matches!(parse_matrix(&bad_label), Err(Error::Challenge(_))));
        let no_eq = full.replacen("a_{11} =", "a_{11}", 1);
        assert!(matches!(parse_matrix(&no_eq), Err(Error::Challenge(_))));
        let junk = full.replacen("a_{11} = ε", "a_{11} = x", 1);
        assert!(parse_matrix(&junk).is_err());
    }

    #[test]
    fn copying_m_into_ma_warns() {
        let set = ChallengeSet::parse(PUBLISHED_M, PUBLISHED_M, PUBLISHED_MB).unwrap();
        assert!(set
            .warnings
            .contains(&ChallengeWarning::Duplicate("M", "Ma")));
        assert!(!set.is_distinct());
    }

    #[test]
    fn load_reads_files() {
        let dir = std::env::temp_dir().join(format!("grkex-challenge-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let paths = ["M.txt", "Ma.txt", "Mb.txt"].map(|f| dir.join(f));
        for (p, t) in paths.iter().zip([PUBLISHED_M, PUBLISHED_MA, PUBLISHED_MB]) {
            std::fs::write(p, t).unwrap();
        }
        let set = ChallengeSet::load(&paths[0], &paths[1], &paths[2]).unwrap();
        assert_eq!(set, ChallengeSet::published().unwrap());
        assert!(matches!(
            ChallengeSet::load(dir.join("nope"), &paths[1], &paths[2]),
            Err(Error::Io(_))
        ));
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
