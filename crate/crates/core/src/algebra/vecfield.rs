//! Polynomial vector fields: directional derivative and Lie bracket.

use std::fmt;

use crate::algebra::polynomial::{Polynomial, Rat};
use crate::error::{Error, Result};

/// A vector field with polynomial components; component `i` is the
/// coefficient of the `i`-th coordinate derivation.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PolyVectorField {
    components: Vec<Polynomial>,
}

impl PolyVectorField {
    pub fn new(components: Vec<Polynomial>) -> Result<Self> {
        let n = components.len();
        if n == 0 {
            return Err(Error::DimensionMismatch("empty vector field".into()));
        }
        for c in &components {
            if c.nvars() != n {
                return Err(Error::DimensionMismatch(format!(
                    "component has {} variables, dimension is {n}",
                    c.nvars()
                )));
            }
        }
        Ok(PolyVectorField { components })
    }

    pub fn zero(n: usize) -> Self {
        PolyVectorField {
            components: vec![Polynomial::zero(n); n],
        }
    }

    /// The coordinate field for axis `i` (1-based).
    pub fn coordinate(n: usize, i: usize) -> Result<Self> {
        if i == 0 || i > n {
            return Err(Error::IndexOutOfRange { index: i, nvars: n });
        }
        let mut components = vec![Polynomial::zero(n); n];
        components[i - 1] = Polynomial::one(n);
        Ok(PolyVectorField { components })
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn component(&self, i: usize) -> &Polynomial {
        &self.components[i]
    }

    pub fn components(&self) -> &[Polynomial] {
        &self.components
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(|c| c.is_zero())
    }

    /// Apply the field to a function: `Xh = sum_i X^i dh/dx_i`.
    pub fn apply(&self, h: &Polynomial) -> Result<Polynomial> {
        if h.nvars() != self.dim() {
            return Err(Error::ArityMismatch {
                expected: self.dim(),
                got: h.nvars(),
            });
        }
        let mut out = Polynomial::zero(self.dim());
        for (i, comp) in self.components.iter().enumerate() {
            if comp.is_zero() {
                continue;
            }
            let dh = h.partial(i + 1)?;
            if dh.is_zero() {
                continue;
            }
            out = out.add(&comp.mul(&dh));
        }
        Ok(out)
    }

    /// Lie bracket `[X, Y]`: component `j` is `X(Y^j) - Y(X^j)`.
    pub fn lie_bracket(&self, other: &PolyVectorField) -> Result<PolyVectorField> {
        if self.dim() != other.dim() {
            return Err(Error::ArityMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        let mut components = Vec::with_capacity(self.dim());
        for j in 0..self.dim() {
            let a = self.apply(other.component(j))?;
            let b = other.apply(self.component(j))?;
            components.push(a.sub(&b));
        }
        Ok(PolyVectorField { components })
    }

    pub fn add(&self, other: &PolyVectorField) -> PolyVectorField {
        assert_eq!(self.dim(), other.dim());
        PolyVectorField {
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a.add(b))
                .collect(),
        }
    }

    pub fn scale(&self, c: &Rat) -> PolyVectorField {
        PolyVectorField {
            components: self.components.iter().map(|p| p.scale(c)).collect(),
        }
    }

    pub fn neg(&self) -> PolyVectorField {
        PolyVectorField {
            components: self.components.iter().map(|p| p.neg()).collect(),
        }
    }

    pub fn eval_rat(&self, x: &[Rat]) -> Result<Vec<Rat>> {
        self.components.iter().map(|c| c.eval_rat(x)).collect()
    }

    pub fn eval_f64(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.components.iter().map(|c| c.eval_f64(x)).collect()
    }
}

impl fmt::Display for PolyVectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.components.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            write!(f, "({c}) d{}", i + 1)?;
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl fmt::Debug for PolyVectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PolyVectorField({self})")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::polynomial::rat;

    fn pf(comps: &[&str], n: usize) -> PolyVectorField {
        PolyVectorField::new(
            comps
                .iter()
                .map(|s| Polynomial::parse(s, n, None).unwrap())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn apply_examples() {
        // d1 applied to x1^2
        let x = pf(&["1", "0"], 2);
        let h = Polynomial::parse("x1^2", 2, None).unwrap();
        assert_eq!(x.apply(&h).unwrap(), Polynomial::parse("2x1", 2, None).unwrap());

        // Heisenberg X2 = d2 + x1 d3 applied to x3 gives x1
        let x2 = pf(&["0", "1", "x1"], 3);
        let h = Polynomial::parse("x3", 3, None).unwrap();
        assert_eq!(x2.apply(&h).unwrap(), Polynomial::parse("x1", 3, None).unwrap());

        // Grushin second field x d_y applied to y gives x
        let g2 = pf(&["0", "x1"], 2);
        let h = Polynomial::parse("x2", 2, None).unwrap();
        assert_eq!(g2.apply(&h).unwrap(), Polynomial::parse("x1", 2, None).unwrap());
    }

    #[test]
    fn bracket_examples() {
        // [dx, x dy] = dy
        let a = pf(&["1", "0"], 2);
        let b = pf(&["0", "x1"], 2);
        assert_eq!(a.lie_bracket(&b).unwrap(), pf(&["0", "1"], 2));

        // Martinet [X1, X2] = x1 d3
        let x1 = pf(&["1", "0", "0"], 3);
        let x2 = pf(&["0", "1", "1/2 x1^2"], 3);
        assert_eq!(x1.lie_bracket(&x2).unwrap(), pf(&["0", "0", "x1"], 3));

        // [X, X] = 0
        assert!(x2.lie_bracket(&x2).unwrap().is_zero());
    }

    #[test]
    fn leibniz_rule() {
        let x = pf(&["x2", "1", "x1 x2"], 3);
        let p = Polynomial::parse("x1^2 - x3", 3, None).unwrap();
        let q = Polynomial::parse("x2 x3 + 2", 3, None).unwrap();
        let lhs = x.apply(&p.mul(&q)).unwrap();
        let rhs = p.mul(&x.apply(&q).unwrap()).add(&q.mul(&x.apply(&p).unwrap()));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn eval_field() {
        let x2 = pf(&["0", "1", "1/2 x1^2"], 3);
        assert_eq!(
            x2.eval_rat(&[rat(2), rat(0), rat(0)]).unwrap(),
            vec![rat(0), rat(1), rat(2)]
        );
    }
}
