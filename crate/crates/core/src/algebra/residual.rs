use num_traits::Zero;

use super::table::{AlgebraTable, Structure};
use crate::arith::{Poly, RatExpr};

/// Entries indexed `(x, y, z, output)` over basis elements.
#[derive(Clone, Debug, PartialEq)]
pub struct ResidualTensor {
    dim: usize,
    entries: Vec<RatExpr>,
}

impl ResidualTensor {
    pub(crate) fn from_polys(dim: usize, polys: Vec<Poly>, scale: &Poly) -> Self {
        let entries = polys
            .into_iter()
            .map(|p| {
                if p.is_zero() {
                    RatExpr::zero()
                } else {
                    RatExpr::new(p, scale.clone()).expect("nonzero scale")
                }
            })
            .collect();
        ResidualTensor { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, x: usize, y: usize, z: usize, out: usize) -> &RatExpr {
        let n = self.dim;
        &self.entries[((x * n + y) * n + z) * n + out]
    }

    pub fn entries(&self) -> &[RatExpr] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(RatExpr::is_zero)
    }

    /// `(x, y, z)` triples (0-based) with a nonvanishing output vector.
    pub fn nonzero_triples(&self) -> Vec<(usize, usize, usize)> {
        let n = self.dim;
        let mut out = Vec::new();
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    if (0..n).any(|q| !self.get(x, y, z, q).is_zero()) {
                        out.push((x, y, z));
                    }
                }
            }
        }
        out
    }

    pub fn vector(&self, x: usize, y: usize, z: usize) -> Vec<RatExpr> {
        (0..self.dim)
            .map(|q| self.get(x, y, z, q).clone())
            .collect()
    }

    pub fn scaled(&self, c: &RatExpr) -> ResidualTensor {
        ResidualTensor {
            dim: self.dim,
            entries: self.entries.iter().map(|e| c * e).collect(),
        }
    }

    pub fn add(&self, other: &ResidualTensor) -> ResidualTensor {
        ResidualTensor {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

/// Scaled Leibniz residual: entry `(x, y, z, ·)` holds
/// `scale² · (⟦x,⟦y,z⟧⟧ − ⟦⟦x,y⟧,z⟧ + ⟦⟦x,z⟧,y⟧)`, flattened.
pub(crate) fn leibniz_residual_polys(s: &Structure) -> Vec<Poly> {
    let n = s.dim();
    let mut out = Vec::with_capacity(n * n * n * n);
    let units: Vec<Vec<Poly>> = (0..n).map(|i| s.unit(i)).collect();
    let pair: Vec<Vec<Poly>> = (0..n * n)
        .map(|ij| s.bracket(&units[ij / n], &units[ij % n]))
        .collect();
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                let lhs = s.bracket(&units[x], &pair[y * n + z]);
                let xy_z = s.bracket(&pair[x * n + y], &units[z]);
                let xz_y = s.bracket(&pair[x * n + z], &units[y]);
                for q in 0..n {
                    out.push(&(&lhs[q] - &xy_z[q]) + &xz_y[q]);
                }
            }
        }
    }
    out
}

/// `⟦x,⟦y,z⟧⟧ − ⟦⟦x,y⟧,z⟧ + ⟦⟦x,z⟧,y⟧` on all basis triples. The algebra is
/// right Leibniz iff this vanishes identically.
pub fn leibniz_residual(a: &AlgebraTable) -> ResidualTensor {
    let s = a.structure();
    let polys = leibniz_residual_polys(&s);
    ResidualTensor::from_polys(a.dim(), polys, &s.scale().pow(2))
}

/// First failing triple (0-based) together with its output vector, if any.
pub fn first_leibniz_failure(a: &AlgebraTable) -> Option<((usize, usize, usize), Vec<RatExpr>)> {
    let r = leibniz_residual(a);
    r.nonzero_triples()
        .first()
        .map(|&(x, y, z)| ((x, y, z), r.vector(x, y, z)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    #[test]
    fn abelian_is_leibniz() {
        assert!(leibniz_residual(&AlgebraTable::zero("ab", 4)).is_zero());
    }

    #[test]
    fn one_dim_idempotent_fails() {
        let t = AlgebraTable::from_entries("e", 1, vec![], [(0, 0, 0, RatExpr::one())]);
        let r = leibniz_residual(&t);
        assert_eq!(r.get(0, 0, 0, 0), &RatExpr::one());
        assert_eq!(r.nonzero_triples(), vec![(0, 0, 0)]);
    }

    #[test]
    fn filiform_is_leibniz() {
        let t = AlgebraTable::from_entries(
            "L1",
            4,
            vec![],
            [
                (0, 0, 1, RatExpr::one()),
                (1, 0, 2, RatExpr::one()),
                (2, 0, 3, RatExpr::one()),
            ],
        );
        assert!(leibniz_residual(&t).is_zero());
        assert!(first_leibniz_failure(&t).is_none());
    }

    #[test]
    fn left_only_identity_is_detected() {
        // ⟦e1,e1⟧ = e2, ⟦e1,e2⟧ = e3 is left but not right Leibniz.
        let t = AlgebraTable::from_entries(
            "left",
            3,
            vec![],
            [(0, 0, 1, RatExpr::one()), (0, 1, 2, RatExpr::one())],
        );
        let ((x, y, z), v) = first_leibniz_failure(&t).unwrap();
        assert_eq!((x, y, z), (0, 0, 0));
        assert_eq!(v[2], RatExpr::one());
    }
}
