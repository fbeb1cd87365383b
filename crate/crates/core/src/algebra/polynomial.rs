//! Sparse multivariate polynomials over the rationals.
//!
//! Terms are kept in a `BTreeMap` from dense exponent vectors to nonzero
//! rational coefficients, so iteration order is deterministic.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact scalar used throughout the symbolic layer.
pub type Rat = BigRational;

pub fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn rat_frac(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Parse a rational written as `a` or `a/b`.
pub fn parse_rat(s: &str) -> Result<Rat> {
    let s = s.trim();
    let parse_int = |t: &str| -> Result<BigInt> {
        t.parse::<BigInt>()
            .map_err(|_| Error::PolySyntax(format!("invalid integer `{t}`")))
    };
    match s.split_once('/') {
        Some((a, b)) => {
            let num = parse_int(a)?;
            let den = parse_int(b)?;
            if den.is_zero() {
                return Err(Error::PolySyntax(format!("zero denominator in `{s}`")));
            }
            Ok(Rat::new(num, den))
        }
        None => Ok(Rat::from_integer(parse_int(s)?)),
    }
}

/// Render a rational as `a` or `a/b`.
pub fn rat_to_string(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Polynomial {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, Rat>,
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Polynomial {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: Rat) -> Self {
        let mut p = Self::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(vec![0; nvars], c);
        }
        p
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, Rat::one())
    }

    /// The monomial `x_i` (1-based index).
    pub fn var(nvars: usize, i: usize) -> Result<Self> {
        if i == 0 || i > nvars {
            return Err(Error::IndexOutOfRange { index: i, nvars });
        }
        let mut exps = vec![0; nvars];
        exps[i - 1] = 1;
        let mut p = Self::zero(nvars);
        p.terms.insert(exps, Rat::one());
        Ok(p)
    }

    pub fn monomial(nvars: usize, exps: Vec<u32>, c: Rat) -> Self {
        assert_eq!(exps.len(), nvars);
        let mut p = Self::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(exps, c);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty() || (self.terms.len() == 1 && self.terms.keys().next().unwrap().iter().all(|&e| e == 0))
    }

    pub fn constant_value(&self) -> Option<Rat> {
        if self.is_zero() {
            Some(Rat::zero())
        } else if self.is_constant() {
            Some(self.terms.values().next().unwrap().clone())
        } else {
            None
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &Rat)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    fn insert_term(&mut self, exps: Vec<u32>, c: Rat) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(exps) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get().clone() + c;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        assert_eq!(self.nvars, other.nvars);
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.insert_term(e.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Polynomial) -> Polynomial {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Polynomial {
        let mut out = Polynomial::zero(self.nvars);
        for (e, c) in &self.terms {
            out.terms.insert(e.clone(), -c.clone());
        }
        out
    }

    pub fn scale(&self, c: &Rat) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero(self.nvars);
        }
        let mut out = Polynomial::zero(self.nvars);
        for (e, k) in &self.terms {
            out.terms.insert(e.clone(), k * c);
        }
        out
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        assert_eq!(self.nvars, other.nvars);
        let mut out = Polynomial::zero(self.nvars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let exps: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.insert_term(exps, ca * cb);
            }
        }
        out
    }

    /// Partial derivative with respect to `x_i` (1-based).
    pub fn partial(&self, i: usize) -> Result<Polynomial> {
        if i == 0 || i > self.nvars {
            return Err(Error::IndexOutOfRange {
                index: i,
                nvars: self.nvars,
            });
        }
        let mut out = Polynomial::zero(self.nvars);
        for (e, c) in &self.terms {
            let k = e[i - 1];
            if k == 0 {
                continue;
            }
            let mut exps = e.clone();
            exps[i - 1] = k - 1;
            out.insert_term(exps, c * rat(k as i64));
        }
        Ok(out)
    }

    pub fn eval_rat(&self, x: &[Rat]) -> Result<Rat> {
        if x.len() != self.nvars {
            return Err(Error::ArityMismatch {
                expected: self.nvars,
                got: x.len(),
            });
        }
        let mut acc = Rat::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (xi, &k) in x.iter().zip(e) {
                for _ in 0..k {
                    t *= xi;
                }
            }
            acc += t;
        }
        Ok(acc)
    }

    pub fn eval_f64(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.nvars {
            return Err(Error::ArityMismatch {
                expected: self.nvars,
                got: x.len(),
            });
        }
        let mut acc = 0.0;
        for (e, c) in &self.terms {
            let mut t = c.to_f64().unwrap_or(f64::NAN);
            for (xi, &k) in x.iter().zip(e) {
                t *= xi.powi(k as i32);
            }
            acc += t;
        }
        Ok(acc)
    }

    /// Total degree of the lowest-degree term, if any.
    pub fn min_total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).min()
    }

    pub fn max_total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    /// Weighted degree of the lowest term under per-variable weights.
    pub fn min_weighted_degree(&self, weights: &[u32]) -> Option<u64> {
        assert_eq!(weights.len(), self.nvars);
        self.terms
            .keys()
            .map(|e| e.iter().zip(weights).map(|(&a, &w)| a as u64 * w as u64).sum())
            .min()
    }

    /// Keep only the terms of exact weighted degree `d`.
    pub fn weighted_part(&self, weights: &[u32], d: u64) -> Polynomial {
        assert_eq!(weights.len(), self.nvars);
        let mut out = Polynomial::zero(self.nvars);
        for (e, c) in &self.terms {
            let deg: u64 = e.iter().zip(weights).map(|(&a, &w)| a as u64 * w as u64).sum();
            if deg == d {
                out.terms.insert(e.clone(), c.clone());
            }
        }
        out
    }

    /// Keep only the terms of total degree at most `d`.
    pub fn truncate_total_degree(&self, d: u32) -> Polynomial {
        let mut out = Polynomial::zero(self.nvars);
        for (e, c) in &self.terms {
            if e.iter().sum::<u32>() <= d {
                out.terms.insert(e.clone(), c.clone());
            }
        }
        out
    }

    /// Recenter at `center`: returns `q` with `q(x) = self(x + center)`.
    pub fn taylor_shift(&self, center: &[Rat]) -> Result<Polynomial> {
        if center.len() != self.nvars {
            return Err(Error::ArityMismatch {
                expected: self.nvars,
                got: center.len(),
            });
        }
        if center.iter().all(|c| c.is_zero()) {
            return Ok(self.clone());
        }
        // Substitute x_i -> x_i + c_i one variable at a time.
        let mut out = Polynomial::zero(self.nvars);
        for (e, c) in &self.terms {
            let mut term = Polynomial::constant(self.nvars, c.clone());
            for (i, &k) in e.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                // (x_i + c_i)^k via binomial expansion
                let mut base = Polynomial::zero(self.nvars);
                let mut exps = vec![0; self.nvars];
                exps[i] = 1;
                base.terms.insert(exps, Rat::one());
                if !center[i].is_zero() {
                    base.insert_term(vec![0; self.nvars], center[i].clone());
                }
                let mut pw = Polynomial::one(self.nvars);
                for _ in 0..k {
                    pw = pw.mul(&base);
                }
                term = term.mul(&pw);
            }
            out = out.add(&term);
        }
        Ok(out)
    }

    /// Composition `self(maps[0], ..., maps[n-1])`, truncated at total degree
    /// `max_deg` in the new variables after every product.
    pub fn compose_truncated(&self, maps: &[Polynomial], max_deg: u32) -> Polynomial {
        assert_eq!(maps.len(), self.nvars);
        let out_nvars = maps.first().map(|m| m.nvars()).unwrap_or(0);
        let mut acc = Polynomial::zero(out_nvars);
        for (e, c) in &self.terms {
            let mut term = Polynomial::constant(out_nvars, c.clone());
            for (i, &k) in e.iter().enumerate() {
                for _ in 0..k {
                    term = term.mul(&maps[i]).truncate_total_degree(max_deg);
                    if term.is_zero() {
                        break;
                    }
                }
                if term.is_zero() {
                    break;
                }
            }
            acc = acc.add(&term);
        }
        acc
    }

    /// Substitute fixed rational values for a subset of the variables,
    /// keeping the arity (substituted variables become inert).
    pub fn substitute(&self, assignments: &[(usize, Rat)]) -> Result<Polynomial> {
        for (i, _) in assignments {
            if *i == 0 || *i > self.nvars {
                return Err(Error::IndexOutOfRange {
                    index: *i,
                    nvars: self.nvars,
                });
            }
        }
        let mut out = Polynomial::zero(self.nvars);
        'terms: for (e, c) in &self.terms {
            let mut exps = e.clone();
            let mut coeff = c.clone();
            for (i, v) in assignments {
                let k = exps[*i - 1];
                if k > 0 {
                    if v.is_zero() {
                        continue 'terms;
                    }
                    for _ in 0..k {
                        coeff *= v;
                    }
                    exps[*i - 1] = 0;
                }
            }
            out.insert_term(exps, coeff);
        }
        Ok(out)
    }

    /// Leading coefficient in the deterministic term order.
    pub fn leading_coeff(&self) -> Option<&Rat> {
        self.terms.values().next()
    }

    /// Sign-normalized copy: leading coefficient made positive. Returns the
    /// normalized polynomial and whether the sign was flipped.
    pub fn sign_normalized(&self) -> (Polynomial, bool) {
        match self.leading_coeff() {
            Some(c) if c.is_negative() => (self.neg(), true),
            _ => (self.clone(), false),
        }
    }

    /// Exact constant ratio `self / other` when the two polynomials are
    /// proportional; `None` otherwise.
    pub fn constant_ratio(&self, other: &Polynomial) -> Option<Rat> {
        if other.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(Rat::zero());
        }
        if self.terms.len() != other.terms.len() {
            return None;
        }
        let (e0, c0) = self.terms.iter().next().unwrap();
        let d0 = other.terms.get(e0)?;
        let ratio = c0 / d0;
        if self == &other.scale(&ratio) {
            Some(ratio)
        } else {
            None
        }
    }

    /// Parse from the model-file grammar: signed sums of terms
    /// `c x<i>^<k> ...`, rational `c` written `a` or `a/b`, `^1` optional,
    /// whitespace-insensitive. `names` optionally maps custom variable names
    /// onto `x1..xn`.
    pub fn parse(input: &str, nvars: usize, names: Option<&[String]>) -> Result<Polynomial> {
        Parser {
            chars: input.chars().collect(),
            pos: 0,
            nvars,
            names,
            input,
        }
        .parse()
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in &self.terms {
            let neg = c.is_negative();
            let abs = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
                first = false;
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let has_vars = e.iter().any(|&k| k > 0);
            let mut wrote = false;
            if !abs.is_one() || !has_vars {
                write!(f, "{}", rat_to_string(&abs))?;
                wrote = true;
            }
            for (i, &k) in e.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                if wrote {
                    write!(f, " ")?;
                }
                if k == 1 {
                    write!(f, "x{}", i + 1)?;
                } else {
                    write!(f, "x{}^{}", i + 1, k)?;
                }
                wrote = true;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Polynomial({self})")
    }
}

struct Parser<'a> {
    chars: Vec<char>,
    pos: usize,
    nvars: usize,
    names: Option<&'a [String]>,
    input: &'a str,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek();
        if c.is_some() {
            self.pos += 1;
        }
        c
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn parse(mut self) -> Result<Polynomial> {
        let mut acc = Polynomial::zero(self.nvars);
        self.skip_ws();
        if self.peek().is_none() {
            return Err(Error::PolySyntax("empty polynomial".into()));
        }
        let mut sign = 1i64;
        match self.peek() {
            Some('+') => {
                self.bump();
            }
            Some('-') => {
                self.bump();
                sign = -1;
            }
            _ => {}
        }
        loop {
            let term = self.parse_term(sign)?;
            acc = acc.add(&term);
            self.skip_ws();
            match self.peek() {
                None => break,
                Some('+') => {
                    self.bump();
                    sign = 1;
                }
                Some('-') => {
                    self.bump();
                    sign = -1;
                }
                Some(c) => {
                    return Err(Error::PolySyntax(format!(
                        "unexpected `{c}` at offset {} in `{}`",
                        self.pos, self.input
                    )))
                }
            }
        }
        Ok(acc)
    }

    fn parse_uint(&mut self) -> Result<String> {
        self.skip_ws();
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(Error::PolySyntax(format!(
                "expected digits at offset {} in `{}`",
                self.pos, self.input
            )));
        }
        Ok(self.chars[start..self.pos].iter().collect())
    }

    fn try_parse_name(&mut self) -> Option<usize> {
        // Custom variable names: longest match against the declared list.
        let names = self.names?;
        let rest: String = self.chars[self.pos..].iter().collect();
        let mut best: Option<(usize, usize)> = None;
        for (idx, name) in names.iter().enumerate() {
            if !name.is_empty() && rest.starts_with(name.as_str()) {
                match best {
                    Some((_, len)) if len >= name.len() => {}
                    _ => best = Some((idx, name.len())),
                }
            }
        }
        let (idx, len) = best?;
        self.pos += len;
        Some(idx + 1)
    }

    fn parse_term(&mut self, sign: i64) -> Result<Polynomial> {
        self.skip_ws();
        let mut coeff = rat(sign);
        let mut exps = vec![0u32; self.nvars];
        let mut saw_anything = false;

        if matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            let num = self.parse_uint()?;
            self.skip_ws();
            let r = if self.peek() == Some('/') {
                self.bump();
                let den = self.parse_uint()?;
                parse_rat(&format!("{num}/{den}"))?
            } else {
                parse_rat(&num)?
            };
            coeff *= r;
            saw_anything = true;
        }

        loop {
            self.skip_ws();
            if self.peek() == Some('*') {
                self.bump();
                self.skip_ws();
            }
            let var_index = if self.peek() == Some('x')
                && matches!(self.chars.get(self.pos + 1), Some(c) if c.is_ascii_digit())
            {
                self.bump();
                let idx = self.parse_uint()?;
                let i: usize = idx
                    .parse()
                    .map_err(|_| Error::PolySyntax(format!("bad variable index x{idx}")))?;
                if i == 0 || i > self.nvars {
                    return Err(Error::UnknownVariable(format!("x{i}")));
                }
                Some(i)
            } else {
                self.try_parse_name()
            };
            let Some(i) = var_index else { break };
            saw_anything = true;
            let mut k: u32 = 1;
            self.skip_ws();
            if self.peek() == Some('^') {
                self.bump();
                let e = self.parse_uint()?;
                k = e
                    .parse()
                    .map_err(|_| Error::PolySyntax(format!("bad exponent `{e}`")))?;
            }
            exps[i - 1] += k;
        }

        if !saw_anything {
            // Something that is neither a number nor a known variable.
            if let Some(c) = self.peek() {
                if c.is_ascii_alphabetic() {
                    let start = self.pos;
                    while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '_') {
                        self.pos += 1;
                    }
                    let word: String = self.chars[start..self.pos].iter().collect();
                    return Err(Error::UnknownVariable(word));
                }
            }
            return Err(Error::PolySyntax(format!(
                "expected a term at offset {} in `{}`",
                self.pos, self.input
            )));
        }
        Ok(Polynomial::monomial(self.nvars, exps, coeff))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str, n: usize) -> Polynomial {
        Polynomial::parse(s, n, None).unwrap()
    }

    #[test]
    fn eval_examples() {
        // x1^2/2 at (2,0,0)
        let h = p("1/2 x1^2", 3);
        assert_eq!(h.eval_rat(&[rat(2), rat(0), rat(0)]).unwrap(), rat(2));
        // 3x1^2x3^2 - 2x2 at (1,1,1)
        let h = p("3 x1^2 x3^2 - 2 x2", 3);
        assert_eq!(h.eval_rat(&[rat(1), rat(1), rat(1)]).unwrap(), rat(1));
        // zero polynomial
        let h = p("0", 2);
        assert!(h.is_zero());
        assert_eq!(h.eval_rat(&[rat(7), rat(-3)]).unwrap(), rat(0));
    }

    #[test]
    fn eval_arity_mismatch() {
        let h = p("x1", 2);
        assert!(matches!(
            h.eval_rat(&[rat(1)]),
            Err(Error::ArityMismatch { .. })
        ));
    }

    #[test]
    fn partial_examples() {
        let h = p("1/2 x1^2", 3);
        assert_eq!(h.partial(1).unwrap(), p("x1", 3));
        assert!(h.partial(2).unwrap().is_zero());
        let h = p("3 x1^2 x3^2", 3);
        assert_eq!(h.partial(3).unwrap(), p("6 x1^2 x3", 3));
        assert!(matches!(
            h.partial(4),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn parse_variants() {
        assert_eq!(p("1/2x1^2", 3), p("1/2 x1 x1", 3));
        assert_eq!(p("-x1 + x1", 2), Polynomial::zero(2));
        assert_eq!(p("2 x2^1", 2), p("2x2", 2));
        assert!(Polynomial::parse("x0", 3, None).is_err());
        assert!(Polynomial::parse("x4", 3, None).is_err());
        assert!(matches!(
            Polynomial::parse("y1", 2, None),
            Err(Error::UnknownVariable(_))
        ));
    }

    #[test]
    fn parse_named_variables() {
        let names = vec!["u".to_string(), "v".to_string()];
        let h = Polynomial::parse("u^2 - 3v", 2, Some(&names)).unwrap();
        assert_eq!(h, p("x1^2 - 3 x2", 2));
    }

    #[test]
    fn display_round_trip() {
        for s in [
            "1/2 x1^2 - x2 + 3",
            "0",
            "-x1 x2 x3",
            "7/3",
            "x1^4 - 2/5 x2^2 x3 + x1",
        ] {
            let h = p(s, 3);
            let printed = h.to_string();
            assert_eq!(p(&printed, 3), h, "round trip failed for `{s}` -> `{printed}`");
        }
    }

    #[test]
    fn taylor_shift_recenters() {
        let h = p("x1^2 - x2", 2);
        let shifted = h.taylor_shift(&[rat(1), rat(2)]).unwrap();
        // shifted(x) = (x1+1)^2 - (x2+2)
        assert_eq!(shifted, p("x1^2 + 2x1 - x2 - 1", 2));
    }

    #[test]
    fn substitute_freezes_variables() {
        let h = p("x1^2 x2 + x3", 3);
        let g = h.substitute(&[(1, rat(2))]).unwrap();
        assert_eq!(g, p("4 x2 + x3", 3));
    }

    #[test]
    fn weighted_parts() {
        let h = p("x1^2 + x2", 2);
        let w = [1u32, 2u32];
        assert_eq!(h.weighted_part(&w, 2), p("x1^2 + x2", 2));
        assert_eq!(h.min_weighted_degree(&w), Some(2));
    }

    #[test]
    fn constant_ratio_detects_proportionality() {
        let a = p("2 x1^2 + 2 x2^2", 2);
        let b = p("x1^2 + x2^2", 2);
        assert_eq!(a.constant_ratio(&b), Some(rat(2)));
        let c = p("x1^2 + x2", 2);
        assert_eq!(a.constant_ratio(&c), None);
    }
}
