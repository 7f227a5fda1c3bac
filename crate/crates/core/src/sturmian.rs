//! Square-table bounce codes for rational slopes and the alternating
//! insertion strings that characterize rational corner angles.
//!
//! Codes use `0` for a crossing of a horizontal grid line (a bounce off a
//! horizontal side of the square) and `1` for a vertical one.

use serde::Serialize;

use crate::error::{Error, Result};

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn check_coprime(p: u64, q: u64) -> Result<()> {
    if p == 0 || q == 0 {
        return Err(Error::Precondition(format!("p and q must be positive, got {p}/{q}")));
    }
    if gcd(p, q) != 1 {
        return Err(Error::Precondition(format!("{p} and {q} are not coprime")));
    }
    Ok(())
}

/// Number of vertical crossings between the `j`-th and `(j+1)`-th horizontal
/// crossing of the line of slope `p/q` started just right of the origin.
fn runs(p: u64, q: u64) -> Vec<u64> {
    (0..p).map(|j| ((j + 1) * q) / p - (j * q) / p).collect()
}

fn spell(runs: &[u64]) -> String {
    let mut s = String::with_capacity(runs.iter().sum::<u64>() as usize + runs.len());
    for &r in runs {
        s.push('0');
        s.extend(std::iter::repeat_n('1', r as usize));
    }
    s
}

/// One period of the grid cutting sequence of slope `p/q`: `p` zeros and `q` ones.
pub fn cutting_sequence(p: u64, q: u64) -> Result<String> {
    check_coprime(p, q)?;
    Ok(spell(&runs(p, q)))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SquareCode {
    pub p: u64,
    pub q: u64,
    pub word: String,
}

impl SquareCode {
    /// Lengths of the runs of ones following each zero, in order.
    pub fn runs(&self) -> Vec<usize> {
        self.word.split('0').skip(1).map(str::len).collect()
    }
}

/// One period of the square-table bounce code of slope `p/q`: two periods of
/// the cutting sequence, started at a zero.
///
/// Among the rotations that start a zero-run block with the shortest run and
/// end with the longest, the lexicographically largest is used. This pins
/// down the phase of the periodic orbit (it starts just after a corner
/// passage) without affecting the cyclic word.
pub fn square_bounce_word(p: u64, q: u64) -> Result<SquareCode> {
    check_coprime(p, q)?;
    let r = runs(p, q);
    let (lo, hi) = (*r.iter().min().unwrap(), *r.iter().max().unwrap());
    let best = (0..r.len())
        .map(|k| {
            let mut rot = r[k..].to_vec();
            rot.extend_from_slice(&r[..k]);
            rot
        })
        .filter(|rot| rot[0] == lo && rot[rot.len() - 1] == hi)
        .map(|rot| spell(&rot))
        .max()
        .expect("the shortest run is followed cyclically by a longest one");
    Ok(SquareCode {
        p,
        q,
        word: best.repeat(2),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InsertionPattern {
    pub p: u64,
    pub q: u64,
    /// `2p` strings over `{A, B}`, some possibly empty.
    pub strings: Vec<String>,
}

impl InsertionPattern {
    pub fn lengths(&self) -> Vec<usize> {
        self.strings.iter().map(String::len).collect()
    }

    pub fn total(&self) -> usize {
        self.strings.iter().map(String::len).sum()
    }
}

/// Alternating `A`/`B` blocks whose lengths are the runs of ones in the square
/// code. Letters alternate across block boundaries and the first block
/// starts with `B`.
pub fn insertion_strings(p: u64, q: u64) -> Result<InsertionPattern> {
    let code = square_bounce_word(p, q)?;
    let mut next_b = true;
    let strings = code
        .runs()
        .into_iter()
        .map(|len| {
            let s: String = (0..len)
                .map(|_| {
                    let c = if next_b { 'B' } else { 'A' };
                    next_b = !next_b;
                    c
                })
                .collect();
            s
        })
        .collect();
    Ok(InsertionPattern { p, q, strings })
}

/// Every cyclic rotation of `s`.
pub fn rotations<T: Clone>(s: &[T]) -> impl Iterator<Item = Vec<T>> + '_ {
    (0..s.len().max(1)).map(move |k| {
        let mut v = s[k.min(s.len())..].to_vec();
        v.extend_from_slice(&s[..k.min(s.len())]);
        v
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cutting_sequences() {
        assert_eq!(cutting_sequence(3, 2).unwrap(), "00101");
        assert_eq!(cutting_sequence(5, 12).unwrap(), "01101101110110111");
        assert_eq!(cutting_sequence(1, 1).unwrap(), "01");
        assert!(cutting_sequence(2, 4).is_err());
        assert!(cutting_sequence(0, 1).is_err());
    }

    #[test]
    fn square_codes() {
        assert_eq!(square_bounce_word(3, 2).unwrap().word, "0010100101");
        assert_eq!(
            square_bounce_word(5, 12).unwrap().word,
            "0110111011011011101101110110110111"
        );
        assert_eq!(square_bounce_word(1, 1).unwrap().word, "0101");
    }

    #[test]
    fn insertion_examples() {
        let ins = insertion_strings(3, 2).unwrap();
        assert_eq!(ins.strings, ["", "B", "A", "", "B", "A"]);
        let ins = insertion_strings(5, 12).unwrap();
        assert_eq!(ins.lengths(), [2, 3, 2, 2, 3, 2, 3, 2, 2, 3]);
        assert_eq!(
            ins.strings,
            ["BA", "BAB", "AB", "AB", "ABA", "BA", "BAB", "AB", "AB", "ABA"]
        );
        assert_eq!(insertion_strings(1, 2).unwrap().strings, ["BA", "BA"]);
        assert_eq!(insertion_strings(1, 3).unwrap().strings, ["BAB", "ABA"]);
    }

    #[test]
    fn code_is_two_periods_of_a_rotated_cutting_sequence() {
        for p in 1..=20 {
            for q in 1..=20 {
                if gcd(p, q) != 1 {
                    continue;
                }
                let cs = cutting_sequence(p, q).unwrap();
                let code = square_bounce_word(p, q).unwrap().word;
                let half = &code[..code.len() / 2];
                assert_eq!(&code[code.len() / 2..], half);
                assert!(format!("{cs}{cs}").contains(half), "{p}/{q}");
                assert!(code.starts_with('0'));
            }
        }
    }
}
