//! Group words over generators a, b, c, ... (inverses in upper case).
//!
//! Internally a letter is a nonzero i32: +k for generator k-1, -k for its inverse.

use crate::error::{Error, Result};

pub type Word = Vec<i32>;

pub fn parse_word(s: &str) -> Result<Word> {
    let s = s.trim();
    if s == "1" || s.is_empty() {
        return Ok(Vec::new());
    }
    s.chars()
        .map(|ch| match ch {
            'a'..='z' => Ok(ch as i32 - 'a' as i32 + 1),
            'A'..='Z' => Ok(-(ch as i32 - 'A' as i32 + 1)),
            _ => Err(Error::Invalid(format!("bad letter {ch:?} in word {s:?}"))),
        })
        .collect()
}

pub fn word_to_string(w: &[i32]) -> String {
    if w.is_empty() {
        return "1".into();
    }
    w.iter()
        .map(|&l| {
            let k = l.unsigned_abs() - 1;
            let base = if l > 0 { b'a' } else { b'A' };
            if k < 26 {
                (base + k as u8) as char
            } else {
                '?'
            }
        })
        .collect()
}

pub fn inverse_word(w: &[i32]) -> Word {
    w.iter().rev().map(|&l| -l).collect()
}

pub fn free_reduce(w: &[i32]) -> Word {
    let mut out: Word = Vec::with_capacity(w.len());
    for &l in w {
        if out.last() == Some(&-l) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    out
}

/// Free and cyclic reduction (for relators).
pub fn cyclic_reduce(w: &[i32]) -> Word {
    let mut w = free_reduce(w);
    while w.len() >= 2 && w[0] == -w[w.len() - 1] {
        w.remove(0);
        w.pop();
    }
    w
}

pub fn concat(parts: &[&[i32]]) -> Word {
    let mut out = Vec::new();
    for p in parts {
        out.extend_from_slice(p);
    }
    free_reduce(&out)
}

pub fn power(w: &[i32], n: i64) -> Word {
    let base = if n >= 0 { w.to_vec() } else { inverse_word(w) };
    let mut out = Vec::new();
    for _ in 0..n.unsigned_abs() {
        out.extend_from_slice(&base);
    }
    free_reduce(&out)
}

/// Replaces generator `gen` (1-based) by `repl` throughout `w`.
pub fn substitute(w: &[i32], gen: i32, repl: &[i32]) -> Word {
    let inv = inverse_word(repl);
    let mut out = Vec::new();
    for &l in w {
        if l == gen {
            out.extend_from_slice(repl);
        } else if l == -gen {
            out.extend_from_slice(&inv);
        } else {
            out.push(l);
        }
    }
    free_reduce(&out)
}

/// Maps generator numbers through `map` (old 1-based index -> new 1-based index).
pub fn renumber(w: &[i32], map: &[i32]) -> Word {
    w.iter().map(|&l| map[(l.unsigned_abs() - 1) as usize] * l.signum()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let w = parse_word("cAcBaCbAb").unwrap();
        assert_eq!(w, vec![3, -1, 3, -2, 1, -3, 2, -1, 2]);
        assert_eq!(word_to_string(&w), "cAcBaCbAb");
        assert_eq!(parse_word("1").unwrap(), Vec::<i32>::new());
        assert!(parse_word("ab1").is_err());
    }

    #[test]
    fn reductions() {
        assert_eq!(free_reduce(&parse_word("abBAc").unwrap()), vec![3]);
        assert_eq!(cyclic_reduce(&parse_word("abcA").unwrap()), vec![2, 3]);
        assert_eq!(substitute(&[1, 2, -1], 1, &[3, 3]), vec![3, 3, 2, -3, -3]);
        assert_eq!(power(&[1, 2], -2), vec![-2, -1, -2, -1]);
    }
}
