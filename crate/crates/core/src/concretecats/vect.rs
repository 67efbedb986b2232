//! Finite-dimensional vector spaces over F_p. An object is its dimension;
//! a morphism V → W is a (dim W) × (dim V) matrix acting on columns.

use super::{Category, Cone, Matrix, ShapedDiagram};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VectCat {
    p: u32,
}

impl VectCat {
    pub fn new(p: u32) -> Self {
        assert!(p >= 2 && (2..p).take_while(|d| d * d <= p).all(|d| p % d != 0), "{p} is not prime");
        VectCat { p }
    }

    pub fn field(&self) -> u32 {
        self.p
    }

    /// Stacks the legs of a cone into one map apex → ⊕ values.
    fn stack(&self, apex: usize, legs: &[Matrix]) -> Matrix {
        legs.iter().fold(Matrix::zeros(0, apex, self.p), |acc, l| acc.vstack(l))
    }
}

impl Category for VectCat {
    type Obj = usize;
    type Mor = Matrix;

    fn identity(&self, x: &usize) -> Matrix {
        Matrix::identity(*x, self.p)
    }

    fn compose(&self, g: &Matrix, f: &Matrix) -> Matrix {
        g.mul(f)
    }

    fn source(&self, f: &Matrix) -> usize {
        f.cols()
    }

    fn target(&self, f: &Matrix) -> usize {
        f.rows()
    }

    fn terminal(&self) -> usize {
        0
    }

    fn initial(&self) -> usize {
        0
    }

    fn to_terminal(&self, x: &usize) -> Matrix {
        Matrix::zeros(0, *x, self.p)
    }

    fn from_initial(&self, x: &usize) -> Matrix {
        Matrix::zeros(*x, 0, self.p)
    }

    fn is_terminal(&self, x: &usize) -> bool {
        *x == 0
    }

    fn is_iso(&self, f: &Matrix) -> bool {
        f.is_invertible()
    }

    fn inverse(&self, f: &Matrix) -> Option<Matrix> {
        f.inverse()
    }

    /// Kernel of ⊕_v V_v → ⊕_{a→b} V_b, (x_v) ↦ (x_b − F_{ab} x_a).
    fn limit(&self, d: &ShapedDiagram<usize, Matrix>) -> Cone<usize, Matrix> {
        let offsets: Vec<usize> = d
            .values
            .iter()
            .scan(0, |acc, &v| {
                let o = *acc;
                *acc += v;
                Some(o)
            })
            .collect();
        let total: usize = d.values.iter().sum();
        let rows: usize = d.shape.covers().iter().map(|&(_, b)| d.values[b]).sum();
        let mut diff = Matrix::zeros(rows, total, self.p);
        let mut r0 = 0;
        for (&(a, b), f) in d.shape.covers().iter().zip(&d.edges) {
            for i in 0..d.values[b] {
                diff.set(r0 + i, offsets[b] + i, 1);
                for j in 0..d.values[a] {
                    let v = (self.p - f.get(i, j)) % self.p;
                    diff.set(r0 + i, offsets[a] + j, v);
                }
            }
            r0 += d.values[b];
        }
        let k = diff.kernel();
        let legs = d.values.iter().zip(&offsets).map(|(&v, &o)| k.row_block(o, v)).collect();
        Cone { apex: k.cols(), legs }
    }

    fn factor(&self, limit: &Cone<usize, Matrix>, cone: &Cone<usize, Matrix>) -> Option<Matrix> {
        let k = self.stack(limit.apex, &limit.legs);
        let l = self.stack(cone.apex, &cone.legs);
        let x = k.solve(&l)?;
        (k.mul(&x) == l).then_some(x)
    }

    fn homs(&self, x: &usize, y: &usize) -> Vec<Matrix> {
        Matrix::all(*y, *x, self.p)
    }

    fn find_iso(&self, x: &usize, y: &usize) -> Option<Matrix> {
        (x == y).then(|| Matrix::identity(*x, self.p))
    }

    fn objects(&self, bound: usize) -> Vec<usize> {
        (0..=bound).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poset::FinPoset;

    #[test]
    fn pullback_dimension() {
        let cat = VectCat::new(2);
        let shape = FinPoset::new(&["A", "B", "C"], &[("A", "C"), ("B", "C")]).unwrap();
        let f = Matrix::from_rows(2, 2, &[vec![1, 0]]).unwrap();
        let g = Matrix::from_rows(2, 2, &[vec![1, 1]]).unwrap();
        let d = ShapedDiagram { shape, values: vec![2, 2, 1], edges: vec![f, g] };
        let lim = cat.limit(&d);
        // 4 − 1 equations on 2 + 2 + 1 unknowns: dim = 5 − 2 = 3
        assert_eq!(lim.apex, 3);
        assert!(lim.commutes(&cat, &d));
        let again = cat.factor(&lim, &lim).unwrap();
        assert_eq!(again, Matrix::identity(3, 2));
    }

    #[test]
    fn empty_and_discrete_limits() {
        let cat = VectCat::new(3);
        let empty = ShapedDiagram { shape: FinPoset::antichain(0), values: vec![], edges: vec![] };
        assert_eq!(cat.limit(&empty).apex, 0);
        let prod = ShapedDiagram { shape: FinPoset::antichain(2), values: vec![1, 2], edges: vec![] };
        assert_eq!(cat.limit(&prod).apex, 3);
    }
}
