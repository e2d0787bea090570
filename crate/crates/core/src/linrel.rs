//! Finite-dimensional linear relations stored as orthonormal graph bases.
//!
//! A relation on `C^n` is a subspace of `C^n x C^n`. The graph basis is a
//! `2n x k` matrix `[P; Q]`; column `j` is the pair `(P e_j, Q e_j)`.
//! Closure is the identity here, so closed-relation hypotheses hold trivially.
//! Blocks of an orthonormal graph live on the unit scale, so derived rank
//! calls use absolute thresholds.

use crate::error::{Error, Result};
use crate::linalg::{self, c, hstack, null_space, null_space_abs as nsa, orth, orth_abs, span_defect, vcat, vstack, CMat, CVec, RANK_TOL};
use num_complex::Complex64;

/// Orthonormal bases of `D(A)`, `R(A)`, `N(A)` and `A0`.
#[derive(Debug, Clone)]
pub struct SubspaceQuad {
    pub domain: CMat,
    pub range: CMat,
    pub kernel: CMat,
    pub mulpart: CMat,
}

#[derive(Debug, Clone)]
pub struct LinearRelation {
    n: usize,
    graph: CMat,
    // rank threshold carried by relations built from noisy data
    tol: f64,
}

impl LinearRelation {
    /// Relation spanned by the columns of a `2n x k` basis.
    pub fn from_graph(basis: &CMat) -> Result<Self> {
        Self::from_graph_tol(basis, RANK_TOL)
    }

    /// As [`from_graph`](Self::from_graph) with a custom relative rank threshold.
    pub fn from_graph_tol(basis: &CMat, tol: f64) -> Result<Self> {
        let rows = basis.nrows();
        if rows == 0 || rows % 2 != 0 {
            return Err(Error::DimensionMismatch(format!(
                "graph basis needs 2n rows, got {rows}"
            )));
        }
        Ok(LinearRelation {
            n: rows / 2,
            graph: orth(basis, tol),
            tol,
        })
    }

    pub fn from_matrix(m: &CMat) -> Result<Self> {
        if !m.is_square() || m.nrows() == 0 {
            return Err(Error::DimensionMismatch(format!(
                "operator must be square, got {:?}",
                m.shape()
            )));
        }
        Self::from_graph(&vstack(&CMat::identity(m.nrows(), m.nrows()), m))
    }

    /// `{(Bx, Lx)}`, i.e. `L B^{-1}` in the relation sense.
    pub fn from_pencil(b: &CMat, l: &CMat) -> Result<Self> {
        if !b.is_square() || b.shape() != l.shape() || b.nrows() == 0 {
            return Err(Error::DimensionMismatch(format!(
                "pencil blocks {:?} and {:?}",
                b.shape(),
                l.shape()
            )));
        }
        Self::from_graph(&vstack(b, l))
    }

    pub fn identity(n: usize) -> Self {
        Self::from_matrix(&CMat::identity(n, n)).expect("n > 0")
    }

    /// The zero relation `{(0,0)}`.
    pub fn zero_relation(n: usize) -> Self {
        LinearRelation {
            n,
            graph: CMat::zeros(2 * n, 0),
            tol: RANK_TOL,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.graph.ncols()
    }

    pub fn graph(&self) -> &CMat {
        &self.graph
    }

    pub fn rank_tol(&self) -> f64 {
        self.tol
    }

    /// Copy with a different rank threshold for derived operations.
    pub fn with_rank_tol(&self, tol: f64) -> Self {
        LinearRelation {
            tol,
            ..self.clone()
        }
    }

    /// First components `P`.
    pub fn p(&self) -> CMat {
        self.graph.rows(0, self.n).into_owned()
    }

    /// Second components `Q`.
    pub fn q(&self) -> CMat {
        self.graph.rows(self.n, self.n).into_owned()
    }

    fn build(n: usize, basis: CMat, tol: f64) -> Self {
        debug_assert_eq!(basis.nrows(), 2 * n);
        LinearRelation {
            n,
            graph: orth_abs(&basis, tol),
            tol,
        }
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch(format!(
                "relations on C^{} and C^{}",
                self.n, other.n
            )));
        }
        Ok(())
    }

    pub fn inverse(&self) -> Self {
        LinearRelation {
            n: self.n,
            graph: vstack(&self.q(), &self.p()),
            tol: self.tol,
        }
    }

    /// `A + B = {(x, u+v) : u in Ax, v in Bx}`.
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let tol = self.tol.max(other.tol);
        let (pa, qa, pb, qb) = (self.p(), self.q(), other.p(), other.q());
        let ns = nsa(&hstack(&pa, &(-&pb)), tol);
        let ka = pa.ncols();
        let na = ns.rows(0, ka).into_owned();
        let nb = ns.rows(ka, ns.nrows() - ka).into_owned();
        let basis = vstack(&(&pa * &na), &(&qa * &na + &qb * &nb));
        Ok(Self::build(self.n, basis, tol))
    }

    /// `self * inner`, i.e. `{(x,z) : y in inner(x), z in self(y)}`.
    pub fn compose(&self, inner: &Self) -> Result<Self> {
        self.check_dim(inner)?;
        let tol = self.tol.max(inner.tol);
        let (pa, qa, pb, qb) = (inner.p(), inner.q(), self.p(), self.q());
        let ns = nsa(&hstack(&qa, &(-&pb)), tol);
        let ka = pa.ncols();
        let na = ns.rows(0, ka).into_owned();
        let nb = ns.rows(ka, ns.nrows() - ka).into_owned();
        let basis = vstack(&(&pa * &na), &(&qb * &nb));
        Ok(Self::build(self.n, basis, tol))
    }

    /// `w I + z A`.
    pub fn scalar_shift_mul(&self, z: Complex64, w: Complex64) -> Self {
        let p = self.p();
        let q = self.q();
        let basis = vstack(&p, &(p.map(|e| e * w) + q.map(|e| e * z)));
        Self::build(self.n, basis, self.tol)
    }

    /// Matrix applied after the relation: `M A`.
    pub fn left_mul(&self, m: &CMat) -> Result<Self> {
        self.compose_matrix_outer(m)
    }

    fn compose_matrix_outer(&self, m: &CMat) -> Result<Self> {
        let lm = Self::from_matrix(m)?;
        lm.with_rank_tol(self.tol).compose(self)
    }

    pub fn integer_power(&self, k: i32) -> Self {
        match k {
            0 => Self::identity(self.n).with_rank_tol(self.tol),
            k if k < 0 => self.inverse().integer_power(-k),
            _ => {
                let mut acc = self.clone();
                for _ in 1..k {
                    acc = self.compose(&acc).expect("same dimension");
                }
                acc
            }
        }
    }

    /// Graph adjoint `{(y*, x*) : <y*, y> = <x*, x> for (x,y) in A}`.
    pub fn adjoint(&self) -> Self {
        let pairing = hstack(&self.q().adjoint(), &(-self.p().adjoint()));
        if pairing.nrows() == 0 {
            // adjoint of {(0,0)} is everything
            return Self::build(self.n, CMat::identity(2 * self.n, 2 * self.n), self.tol);
        }
        Self::build(self.n, nsa(&pairing, self.tol), self.tol)
    }

    pub fn parts(&self) -> SubspaceQuad {
        let (p, q) = (self.p(), self.q());
        let tol = self.tol;
        let kernel_coef = nsa(&q, tol);
        let mul_coef = nsa(&p, tol);
        SubspaceQuad {
            domain: orth_abs(&p, tol),
            range: orth_abs(&q, tol),
            kernel: orth_abs(&(&p * kernel_coef), tol),
            mulpart: orth_abs(&(&q * mul_coef), tol),
        }
    }

    pub fn is_single_valued(&self) -> bool {
        self.parts().mulpart.ncols() == 0
    }

    /// Membership of `(x, y)`; returns the verdict and the raw distance to the graph.
    pub fn contains_pair(&self, x: &CVec, y: &CVec, tol: f64) -> Result<(bool, f64)> {
        if x.len() != self.n || y.len() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "pair of lengths {} and {} for relation on C^{}",
                x.len(),
                y.len(),
                self.n
            )));
        }
        let v = vcat(x, y);
        let d = linalg::dist_to_span(&self.graph, &v);
        Ok((d <= tol * (1.0 + v.norm()), d))
    }

    /// `self ⊆ other` with the largest principal-angle defect.
    pub fn subset_of(&self, other: &Self, tol: f64) -> (bool, f64) {
        if self.n != other.n {
            return (false, f64::INFINITY);
        }
        let d = span_defect(&self.graph, &other.graph);
        (d <= tol, d)
    }

    pub fn equals(&self, other: &Self, tol: f64) -> bool {
        self.rank() == other.rank() && self.subset_of(other, tol).0 && other.subset_of(self, tol).0
    }

    /// The matrix of a single-valued relation with full domain.
    pub fn to_matrix(&self) -> Option<CMat> {
        if self.rank() != self.n {
            return None;
        }
        let p = self.p();
        let lu = p.clone().lu();
        if orth_abs(&p, self.tol).ncols() < self.n {
            return None;
        }
        let pinv = lu.try_inverse()?;
        Some(self.q() * pinv)
    }

    /// Basis of chains `(x, y_1, ..., y_k)` with `(x, y_1), (y_1, y_2), ...` in the relation.
    ///
    /// Columns are stacked vectors of length `(k+1) n`; the first block spans `D(A^k)`.
    pub fn chains(&self, k: usize) -> CMat {
        let n = self.n;
        let r = self.rank();
        if k == 0 {
            return CMat::identity(n, n);
        }
        let (p, q) = (self.p(), self.q());
        let mut sys = CMat::zeros(n * (k - 1), r * k);
        for j in 0..k.saturating_sub(1) {
            sys.view_mut((j * n, j * r), (n, r)).copy_from(&q);
            sys.view_mut((j * n, (j + 1) * r), (n, r)).copy_from(&(-&p));
        }
        let coef = if k == 1 {
            CMat::identity(r, r)
        } else {
            nsa(&sys, self.tol)
        };
        let m = coef.ncols();
        let mut out = CMat::zeros((k + 1) * n, m);
        out.view_mut((0, 0), (n, m))
            .copy_from(&(&p * coef.rows(0, r)));
        for j in 1..=k {
            out.view_mut((j * n, 0), (n, m))
                .copy_from(&(&q * coef.rows((j - 1) * r, r)));
        }
        orth_abs(&out, self.tol)
    }

    /// Orthonormal basis of `D(A^k)`.
    pub fn power_domain(&self, k: usize) -> CMat {
        let ch = self.chains(k);
        orth_abs(&ch.rows(0, self.n).into_owned(), self.tol)
    }
}

/// `{(x, y) : M y = N x}` as a relation.
pub fn relation_from_condition(m: &CMat, nmat: &CMat, tol: f64) -> Result<LinearRelation> {
    if m.shape() != nmat.shape() || !m.is_square() {
        return Err(Error::DimensionMismatch("condition blocks".into()));
    }
    let n = m.nrows();
    let ns = null_space(&hstack(nmat, &(-m)), tol);
    Ok(LinearRelation::build(n, ns, tol))
}

/// Convenience: real vector as complex.
pub fn rvec(v: &[f64]) -> CVec {
    CVec::from_iterator(v.len(), v.iter().map(|&x| c(x, 0.0)))
}
