use num_traits::Zero;

use super::table::AlgebraTable;
use crate::arith::{Bindings, Scalar};
use crate::error::{Error, Result};

/// Row-reduce `rows` in place and keep a basis of their span.
fn row_basis(mut rows: Vec<Vec<Scalar>>) -> Vec<Vec<Scalar>> {
    let cols = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..cols {
        let Some(piv) = (rank..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, piv);
        let inv = rows[rank][col].inv().expect("nonzero pivot");
        let pivot_row: Vec<Scalar> = rows[rank].iter().map(|v| v * &inv).collect();
        for (r, row) in rows.iter_mut().enumerate() {
            if r == rank || row[col].is_zero() {
                continue;
            }
            let f = row[col].clone();
            for (x, p) in row.iter_mut().zip(&pivot_row) {
                *x -= &(&f * p);
            }
        }
        rows[rank] = pivot_row;
        rank += 1;
    }
    rows.truncate(rank);
    rows
}

/// Dimensions of `L¹ = L`, `Lᵏ⁺¹ = ⟦Lᵏ, L⟧` until the series stabilizes.
/// A trailing `0` means the algebra is nilpotent.
pub fn lower_central_series(a: &AlgebraTable, bindings: &Bindings) -> Result<Vec<usize>> {
    let bound = a.bind(bindings)?;
    let n = bound.dim();
    let mut consts = Vec::with_capacity(n * n * n);
    for v in bound.entries() {
        match v.as_constant() {
            Some(c) => consts.push(c),
            None => {
                let name = v
                    .params()
                    .into_iter()
                    .next()
                    .map(|p| p.to_string())
                    .unwrap_or_default();
                return Err(Error::UnboundParam(name));
            }
        }
    }
    let bracket_with_basis = |u: &[Scalar], j: usize| -> Vec<Scalar> {
        let mut w = vec![Scalar::zero(); n];
        for (i, ui) in u.iter().enumerate() {
            if ui.is_zero() {
                continue;
            }
            for (k, wk) in w.iter_mut().enumerate() {
                let c = &consts[(i * n + j) * n + k];
                if !c.is_zero() {
                    *wk += &(ui * c);
                }
            }
        }
        w
    };

    let mut current: Vec<Vec<Scalar>> = (0..n)
        .map(|i| {
            let mut e = vec![Scalar::zero(); n];
            e[i] = Scalar::from_int(1);
            e
        })
        .collect();
    let mut dims = vec![n];
    while !current.is_empty() {
        let spanning: Vec<Vec<Scalar>> = current
            .iter()
            .flat_map(|u| (0..n).map(move |j| (u, j)))
            .map(|(u, j)| bracket_with_basis(u, j))
            .collect();
        let next = row_basis(spanning);
        let d = next.len();
        dims.push(d);
        if d == current.len() {
            break;
        }
        current = next;
    }
    Ok(dims)
}

pub fn is_nilpotent(a: &AlgebraTable, bindings: &Bindings) -> Result<bool> {
    Ok(lower_central_series(a, bindings)?.last() == Some(&0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::table::{Admissible, ParamSpec};
    use crate::arith::{expr, Param, RatExpr};
    use num_traits::One;

    fn table(dim: usize, entries: &[(usize, usize, usize, &str)]) -> AlgebraTable {
        AlgebraTable::from_entries(
            "t",
            dim,
            vec![],
            entries
                .iter()
                .map(|&(i, j, k, e)| (i - 1, j - 1, k - 1, expr(e))),
        )
    }

    #[test]
    fn filiform_series() {
        let l1 = table(4, &[(1, 1, 2, "1"), (2, 1, 3, "1"), (3, 1, 4, "1")]);
        assert_eq!(
            lower_central_series(&l1, &Bindings::new()).unwrap(),
            vec![4, 3, 2, 1, 0]
        );
    }

    #[test]
    fn abelian_series() {
        let ab = AlgebraTable::zero("ab", 4);
        assert_eq!(
            lower_central_series(&ab, &Bindings::new()).unwrap(),
            vec![4, 0]
        );
    }

    #[test]
    fn two_step_series() {
        let l17 = table(4, &[(1, 2, 3, "1"), (2, 1, 4, "1")]);
        assert_eq!(
            lower_central_series(&l17, &Bindings::new()).unwrap(),
            vec![4, 2, 0]
        );
    }

    #[test]
    fn idempotent_stabilizes() {
        let e = AlgebraTable::from_entries("e", 1, vec![], [(0, 0, 0, RatExpr::one())]);
        assert_eq!(
            lower_central_series(&e, &Bindings::new()).unwrap(),
            vec![1, 1]
        );
        assert!(!is_nilpotent(&e, &Bindings::new()).unwrap());
    }

    #[test]
    fn unbound_parameter_is_an_error() {
        let t = AlgebraTable::from_entries(
            "p",
            4,
            vec![ParamSpec {
                param: Param::new("mu"),
                admissible: Admissible::Any,
            }],
            [(0, 0, 3, expr("mu"))],
        );
        assert!(matches!(
            lower_central_series(&t, &Bindings::new()),
            Err(Error::UnboundParam(_))
        ));
        let b: Bindings = [(Param::new("mu"), expr("3"))].into_iter().collect();
        assert_eq!(lower_central_series(&t, &b).unwrap(), vec![4, 1, 0]);
    }
}
