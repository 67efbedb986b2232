//! Dense matrices over a prime field F_p with Gaussian elimination.

use std::fmt;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    p: u32,
    data: Vec<u32>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Matrix{}x{}{:?}", self.rows, self.cols, self.to_rows())
    }
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize, p: u32) -> Self {
        Matrix { rows, cols, p, data: vec![0; rows * cols] }
    }

    pub fn identity(n: usize, p: u32) -> Self {
        let mut m = Self::zeros(n, n, p);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    /// Entries are reduced mod p. All rows must have length `cols`.
    pub fn from_rows(p: u32, cols: usize, rows: &[Vec<i64>]) -> Option<Self> {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return None;
            }
            data.extend(r.iter().map(|&v| v.rem_euclid(p as i64) as u32));
        }
        Some(Matrix { rows: rows.len(), cols, p, data })
    }

    pub fn from_fn(rows: usize, cols: usize, p: u32, f: impl Fn(usize, usize) -> u32) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j) % p);
            }
        }
        Matrix { rows, cols, p, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn field(&self) -> u32 {
        self.p
    }

    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: u32) {
        self.data[i * self.cols + j] = v % self.p;
    }

    pub fn to_rows(&self) -> Vec<Vec<u32>> {
        (0..self.rows).map(|i| self.data[i * self.cols..(i + 1) * self.cols].to_vec()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0)
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "shape mismatch in product");
        let p = self.p as u64;
        let mut out = Matrix::zeros(self.rows, other.cols, self.p);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k) as u64;
                if a == 0 {
                    continue;
                }
                for j in 0..other.cols {
                    let idx = i * other.cols + j;
                    out.data[idx] = ((out.data[idx] as u64 + a * other.get(k, j) as u64) % p) as u32;
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch in sum");
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| (a + b) % self.p).collect();
        Matrix { rows: self.rows, cols: self.cols, p: self.p, data }
    }

    pub fn neg(&self) -> Matrix {
        let data = self.data.iter().map(|&a| (self.p - a) % self.p).collect();
        Matrix { rows: self.rows, cols: self.cols, p: self.p, data }
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        self.add(&other.neg())
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, self.p, |i, j| self.get(j, i))
    }

    /// Kronecker product: block (i, j) is self[i][j] · other.
    pub fn kron(&self, other: &Matrix) -> Matrix {
        let (r, c) = (self.rows * other.rows, self.cols * other.cols);
        let p = self.p as u64;
        Matrix::from_fn(r, c, self.p, |i, j| {
            ((self.get(i / other.rows, j / other.cols) as u64 * other.get(i % other.rows, j % other.cols) as u64) % p)
                as u32
        })
    }

    pub fn hstack(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.rows, other.rows);
        Matrix::from_fn(self.rows, self.cols + other.cols, self.p, |i, j| {
            if j < self.cols {
                self.get(i, j)
            } else {
                other.get(i, j - self.cols)
            }
        })
    }

    pub fn vstack(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.cols);
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Matrix { rows: self.rows + other.rows, cols: self.cols, p: self.p, data }
    }

    /// Rows `start..start + len`.
    pub fn row_block(&self, start: usize, len: usize) -> Matrix {
        Matrix {
            rows: len,
            cols: self.cols,
            p: self.p,
            data: self.data[start * self.cols..(start + len) * self.cols].to_vec(),
        }
    }

    pub fn col_block(&self, start: usize, len: usize) -> Matrix {
        Matrix::from_fn(self.rows, len, self.p, |i, j| self.get(i, start + j))
    }

    fn inv_mod(&self, a: u32) -> u32 {
        // Fermat: a^(p-2)
        let p = self.p as u64;
        let mut base = a as u64 % p;
        let mut e = p - 2;
        let mut acc = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base % p;
            }
            base = base * base % p;
            e >>= 1;
        }
        acc as u32
    }

    /// Reduced row echelon form and pivot columns.
    pub fn rref(&self) -> (Matrix, Vec<usize>) {
        let mut m = self.clone();
        let p = self.p as u64;
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(pr) = (r..m.rows).find(|&i| m.get(i, c) != 0) else {
                continue;
            };
            if pr != r {
                for j in 0..m.cols {
                    m.data.swap(pr * m.cols + j, r * m.cols + j);
                }
            }
            let inv = self.inv_mod(m.get(r, c)) as u64;
            for j in 0..m.cols {
                let idx = r * m.cols + j;
                m.data[idx] = (m.data[idx] as u64 * inv % p) as u32;
            }
            for i in 0..m.rows {
                if i == r {
                    continue;
                }
                let f = m.get(i, c) as u64;
                if f == 0 {
                    continue;
                }
                for j in 0..m.cols {
                    let sub = f * m.get(r, j) as u64 % p;
                    let idx = i * m.cols + j;
                    m.data[idx] = ((m.data[idx] as u64 + p - sub) % p) as u32;
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Columns form a basis of the null space.
    pub fn kernel(&self) -> Matrix {
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut k = Matrix::zeros(self.cols, free.len(), self.p);
        for (j, &f) in free.iter().enumerate() {
            k.set(f, j, 1);
            for (i, &pc) in pivots.iter().enumerate() {
                let v = r.get(i, f);
                k.set(pc, j, (self.p - v) % self.p);
            }
        }
        k
    }

    /// Some X with self · X = b, if one exists.
    pub fn solve(&self, b: &Matrix) -> Option<Matrix> {
        assert_eq!(self.rows, b.rows, "shape mismatch in solve");
        let aug = self.hstack(b);
        let (r, pivots) = aug.rref();
        if pivots.iter().any(|&c| c >= self.cols) {
            return None;
        }
        let mut x = Matrix::zeros(self.cols, b.cols, self.p);
        for (i, &pc) in pivots.iter().enumerate() {
            for j in 0..b.cols {
                x.set(pc, j, r.get(i, self.cols + j));
            }
        }
        Some(x)
    }

    pub fn is_invertible(&self) -> bool {
        self.rows == self.cols && self.rank() == self.rows
    }

    pub fn inverse(&self) -> Option<Matrix> {
        if !self.is_invertible() {
            return None;
        }
        self.solve(&Matrix::identity(self.rows, self.p))
    }

    /// Every matrix of the given shape, in a fixed order.
    pub fn all(rows: usize, cols: usize, p: u32) -> Vec<Matrix> {
        let n = rows * cols;
        let total = (p as usize).checked_pow(n as u32).expect("hom-set too large to enumerate");
        let mut out = Vec::with_capacity(total);
        let mut digits = vec![0u32; n];
        for _ in 0..total {
            out.push(Matrix { rows, cols, p, data: digits.clone() });
            for d in digits.iter_mut() {
                *d += 1;
                if *d < p {
                    break;
                }
                *d = 0;
            }
        }
        out
    }
}
