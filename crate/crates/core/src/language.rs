//! Bounce languages: exact enumeration to bounded length, memoized
//! membership, alternation runs and the convexity test.

use std::collections::{BTreeSet, HashMap};
use std::f64::consts::PI;
use std::sync::RwLock;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{EdgeLabel, LabeledPolygon};
use crate::reconstruction::SpectrumOracle;
use crate::unfolding::{develop, CorridorSolver};

/// Every realizable word up to `max_len`, as edge-index sequences.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LanguageTable {
    pub alphabet: Vec<EdgeLabel>,
    pub max_len: usize,
    pub words: BTreeSet<Vec<usize>>,
    /// Members whose corridor is narrower than the width floor.
    pub marginal: BTreeSet<Vec<usize>>,
}

impl LanguageTable {
    pub fn contains(&self, word: &[usize]) -> bool {
        word.is_empty() || self.words.contains(word)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words_of_len(&self, len: usize) -> impl Iterator<Item = &Vec<usize>> + '_ {
        self.words.iter().filter(move |w| w.len() == len)
    }

    pub fn format(&self, word: &[usize]) -> String {
        word.iter()
            .map(|&e| self.alphabet[e].as_str())
            .collect::<Vec<_>>()
            .join(",")
    }

    /// One comma-separated word per line, sorted as strings.
    pub fn to_lines(&self) -> Vec<String> {
        let mut lines: Vec<String> = self.words.iter().map(|w| self.format(w)).collect();
        lines.sort();
        lines
    }

    /// Reads the one-word-per-line format. The alphabet is every label that
    /// occurs, sorted; `max_len` is the longest word.
    pub fn from_lines(text: &str) -> Result<Self> {
        let rows: Vec<Vec<&str>> = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|l| l.split(',').map(str::trim).collect())
            .collect();
        let labels: BTreeSet<&str> = rows.iter().flatten().copied().collect();
        if labels.iter().any(|l| l.is_empty()) {
            return Err(Error::Parse("empty label in words file".into()));
        }
        let alphabet: Vec<EdgeLabel> = labels.iter().map(|&l| EdgeLabel::new(l)).collect();
        let index: HashMap<&str, usize> = labels.iter().enumerate().map(|(i, &l)| (l, i)).collect();
        let mut words = BTreeSet::new();
        for row in &rows {
            words.insert(row.iter().map(|l| index[l]).collect::<Vec<_>>());
        }
        let max_len = words.iter().map(Vec::len).max().unwrap_or(0);
        Ok(LanguageTable {
            alphabet,
            max_len,
            words,
            marginal: BTreeSet::new(),
        })
    }

    /// Words missing some contiguous factor; empty for a genuine language.
    pub fn factor_violations(&self) -> Vec<Vec<usize>> {
        self.words
            .iter()
            .filter(|w| w.len() > 1 && (!self.contains(&w[1..]) || !self.contains(&w[..w.len() - 1])))
            .cloned()
            .collect()
    }
}

impl SpectrumOracle for LanguageTable {
    fn alphabet(&self) -> &[EdgeLabel] {
        &self.alphabet
    }

    fn contains(&self, word: &[usize]) -> Result<bool> {
        if word.len() > self.max_len {
            return Err(Error::Precondition(format!(
                "stored language only reaches length {}, asked about length {}",
                self.max_len,
                word.len()
            )));
        }
        Ok(LanguageTable::contains(self, word))
    }

    fn max_len(&self) -> Option<usize> {
        Some(self.max_len)
    }
}

/// Memoized membership in the language of one table.
#[derive(Debug)]
pub struct Language<'a> {
    solver: CorridorSolver<'a>,
    cache: RwLock<HashMap<Vec<usize>, bool>>,
}

impl<'a> Language<'a> {
    pub fn new(poly: &'a LabeledPolygon) -> Self {
        Language {
            solver: CorridorSolver::new(poly),
            cache: RwLock::new(HashMap::new()),
        }
    }

    pub fn poly(&self) -> &LabeledPolygon {
        self.solver.poly()
    }

    /// Whether some nonsingular trajectory realizes `word`. Both maximal
    /// proper factors are checked first, which prunes most non-members.
    pub fn contains(&self, word: &[usize]) -> Result<bool> {
        let n = self.poly().len();
        if let Some(&e) = word.iter().find(|&&e| e >= n) {
            return Err(Error::UnknownLabel(format!("#{e}")));
        }
        self.contains_checked(word)
    }

    fn contains_checked(&self, word: &[usize]) -> Result<bool> {
        if word.len() <= 1 {
            return Ok(true);
        }
        if word.windows(2).any(|p| p[0] == p[1]) {
            return Ok(false);
        }
        if let Some(&hit) = self.cache.read().expect("cache lock").get(word) {
            return Ok(hit);
        }
        let result = self.contains_checked(&word[1..])?
            && self.contains_checked(&word[..word.len() - 1])?
            && self.solver.is_feasible(&develop(self.poly(), word)?);
        self.cache
            .write()
            .expect("cache lock")
            .insert(word.to_vec(), result);
        Ok(result)
    }

    pub fn cached_queries(&self) -> usize {
        self.cache.read().expect("cache lock").len()
    }
}

impl SpectrumOracle for Language<'_> {
    fn alphabet(&self) -> &[EdgeLabel] {
        self.poly().labels()
    }

    fn contains(&self, word: &[usize]) -> Result<bool> {
        Language::contains(self, word)
    }
}

/// All members up to `max_len`, grown one letter at a time. A word is tried
/// only when its longest proper prefix and suffix are already members.
pub fn enumerate_language(poly: &LabeledPolygon, max_len: usize) -> Result<LanguageTable> {
    if max_len == 0 {
        return Err(Error::Precondition("max_len must be at least 1".into()));
    }
    let n = poly.len();
    let solver = CorridorSolver::new(poly);
    let diameter = poly.diameter();
    let mut words: BTreeSet<Vec<usize>> = (0..n).map(|e| vec![e]).collect();
    let mut marginal = BTreeSet::new();
    let mut frontier: Vec<Vec<usize>> = words.iter().cloned().collect();
    for _ in 1..max_len {
        let candidates: Vec<Vec<usize>> = frontier
            .iter()
            .flat_map(|w| {
                let last = w[w.len() - 1];
                (0..n).filter(move |&e| e != last).map(move |e| {
                    let mut x = w.clone();
                    x.push(e);
                    x
                })
            })
            .filter(|x| words.contains(&x[1..]))
            .collect();
        let checked: Vec<(Vec<usize>, bool, bool)> = candidates
            .into_par_iter()
            .map(|w| -> Result<_> {
                let dev = develop(poly, &w)?;
                let margin = solver.margin(&dev);
                if margin.is_nan() || margin == f64::INFINITY {
                    return Err(Error::Solver {
                        word: poly.format_word(&w),
                        reason: "non-finite margin".into(),
                    });
                }
                if margin <= crate::unfolding::TIGHT_REL * diameter {
                    return Ok((w, false, false));
                }
                // a tube of radius `margin` around the best line lies in the corridor
                let thin = 2.0 * margin < crate::unfolding::WIDTH_FLOOR_REL * diameter
                    && solver.corridor(&dev)?.is_marginal(diameter);
                Ok((w, true, thin))
            })
            .collect::<Result<_>>()?;
        frontier.clear();
        for (w, feasible, thin) in checked {
            if feasible {
                if thin {
                    marginal.insert(w.clone());
                }
                words.insert(w.clone());
                frontier.push(w);
            }
        }
        if frontier.is_empty() {
            break;
        }
    }
    Ok(LanguageTable {
        alphabet: poly.labels().to_vec(),
        max_len,
        words,
        marginal,
    })
}

/// Membership without keeping a cache around.
pub fn contains(poly: &LabeledPolygon, word: &[usize]) -> Result<bool> {
    Language::new(poly).contains(word)
}

fn alternating(a: usize, b: usize, len: usize) -> Vec<usize> {
    (0..len).map(|i| if i % 2 == 0 { a } else { b }).collect()
}

/// Longest run `ABAB…` or `BABA…` that occurs in a member of length at most
/// `search_len`. Membership is factor-closed, so it is enough to test the
/// runs themselves.
pub fn max_alternation<O: SpectrumOracle + ?Sized>(
    oracle: &O,
    a: usize,
    b: usize,
    search_len: usize,
) -> Result<usize> {
    if a == b {
        return Err(Error::Precondition("alternation needs two distinct letters".into()));
    }
    let cap = oracle.max_len().map_or(search_len, |m| m.min(search_len));
    let mut k = 1;
    while k < cap
        && (oracle.contains(&alternating(a, b, k + 1))? || oracle.contains(&alternating(b, a, k + 1))?)
    {
        k += 1;
    }
    Ok(k)
}

/// Angle interval `[lo, hi)` implied by a maximal alternation of length `k`;
/// `hi` is `None` for `k = 1`, which only says the angle is at least π.
pub fn coarse_angle_bound(k: usize) -> Result<(f64, Option<f64>)> {
    match k {
        0 => Err(Error::Precondition("alternation length must be at least 1".into())),
        1 => Ok((PI, None)),
        k => Ok((PI / k as f64, Some(PI / (k - 1) as f64))),
    }
}

/// A table is convex exactly when every ordered pair of distinct edges is a word.
pub fn convexity_test(table: &LanguageTable) -> Result<bool> {
    if table.max_len < 2 {
        return Err(Error::Precondition("convexity test needs words of length 2".into()));
    }
    let n = table.alphabet.len();
    Ok((0..n).all(|i| (0..n).all(|j| i == j || table.contains(&[i, j]))))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> LabeledPolygon {
        LabeledPolygon::from_coords(
            &[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)],
            &["A", "B", "C", "D"],
        )
        .unwrap()
    }

    fn l_shape() -> LabeledPolygon {
        LabeledPolygon::from_coords(
            &[(0.0, 0.0), (2.0, 0.0), (2.0, 1.0), (1.0, 1.0), (1.0, 2.0), (0.0, 2.0)],
            &["A", "B", "C", "D", "E", "F"],
        )
        .unwrap()
    }

    #[test]
    fn square_pairs_and_no_aba() {
        let s = square();
        let t = enumerate_language(&s, 3).unwrap();
        assert_eq!(t.words_of_len(2).count(), 12);
        assert!(convexity_test(&t).unwrap());
        for w in &t.words {
            assert!(w.windows(2).all(|p| p[0] != p[1]));
        }
        assert!(!t.contains(&s.parse_word_str("A,B,A").unwrap()));
        assert!(t.contains(&s.parse_word_str("A,B,C").unwrap()));
        assert!(t.factor_violations().is_empty());
    }

    #[test]
    fn l_shape_is_not_convex() {
        let l = l_shape();
        let t = enumerate_language(&l, 2).unwrap();
        assert!(!convexity_test(&t).unwrap());
        // C and D meet at the reflex corner; no chord joins them
        assert!(!t.contains(&l.parse_word_str("C,D").unwrap()));
        assert!(t.contains(&l.parse_word_str("B,F").unwrap()));
        assert!(!t.contains(&l.parse_word_str("B,E").unwrap()));
    }

    #[test]
    fn memoized_membership_matches_enumeration() {
        let s = square();
        let t = enumerate_language(&s, 4).unwrap();
        let lang = Language::new(&s);
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    let w = [a, b, c];
                    assert_eq!(lang.contains(&w).unwrap(), t.contains(&w), "{w:?}");
                }
            }
        }
        assert!(lang.contains(&[0, 0]).is_ok_and(|x| !x));
    }

    #[test]
    fn alternation_on_the_square() {
        let s = square();
        let lang = Language::new(&s);
        assert_eq!(max_alternation(&lang, 0, 1, 8).unwrap(), 2);
        assert_eq!(coarse_angle_bound(2).unwrap(), (PI / 2.0, Some(PI)));
        assert_eq!(coarse_angle_bound(1).unwrap(), (PI, None));
        assert!(coarse_angle_bound(0).is_err());
    }

    #[test]
    fn words_file_round_trip() {
        let s = square();
        let t = enumerate_language(&s, 3).unwrap();
        let text = t.to_lines().join("\n");
        let back = LanguageTable::from_lines(&text).unwrap();
        assert_eq!(back.words, t.words);
        assert_eq!(back.max_len, 3);
    }
}
