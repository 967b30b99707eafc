//! Banded LU factorization with partial pivoting, stored column-major in the
//! LAPACK `gbtrf` layout (`kl` extra rows reserved for fill-in).

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    ldab: usize,
    ab: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let ldab = 2 * kl + ku + 1;
        Self { n, kl, ku, ldab, ab: vec![0.0; ldab * n] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn clear(&mut self) {
        self.ab.iter_mut().for_each(|x| *x = 0.0);
    }

    fn in_band(&self, i: usize, j: usize) -> bool {
        i <= j + self.kl && j <= i + self.ku
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        self.kl + self.ku + i - j + j * self.ldab
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if self.in_band(i, j) {
            self.ab[self.idx(i, j)]
        } else {
            0.0
        }
    }

    /// Adds `value` at `(i, j)`; panics outside the declared band.
    pub fn add(&mut self, i: usize, j: usize, value: f64) {
        assert!(self.in_band(i, j), "entry ({i}, {j}) outside band kl={} ku={}", self.kl, self.ku);
        let k = self.idx(i, j);
        self.ab[k] += value;
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        assert!(self.in_band(i, j), "entry ({i}, {j}) outside band kl={} ku={}", self.kl, self.ku);
        let k = self.idx(i, j);
        self.ab[k] = value;
    }

    /// `y = A x` using the unfactored band.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for (i, yi) in y.iter_mut().enumerate() {
            let lo = i.saturating_sub(self.kl);
            let hi = (i + self.ku).min(self.n - 1);
            *yi = (lo..=hi).map(|j| self.get(i, j) * x[j]).sum();
        }
        y
    }

    /// Factors in place.
    pub fn factor(mut self) -> Result<BandLu> {
        let (n, kl, ku, ldab) = (self.n, self.kl, self.ku, self.ldab);
        let kv = ku + kl;
        let ab = &mut self.ab;
        let at = |i: usize, j: usize| kv + i - j + j * ldab;
        let mut piv = vec![0usize; n];
        let scale = ab.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let tiny = scale * f64::EPSILON * n as f64;
        // Column-wise Gaussian elimination (dgbtf2); ju tracks the furthest
        // column touched by fill-in.
        let mut ju = 0usize;
        for j in 0..n {
            let km = kl.min(n - 1 - j);
            let mut p = j;
            let mut best = ab[at(j, j)].abs();
            for i in j + 1..=j + km {
                let v = ab[at(i, j)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            piv[j] = p;
            if !(best > tiny) || !best.is_finite() {
                return Err(Error::SingularJacobian);
            }
            ju = ju.max((j + ku + p - j).min(n - 1));
            if p != j {
                for c in j..=ju {
                    ab.swap(at(p, c), at(j, c));
                }
            }
            let d = ab[at(j, j)];
            for i in j + 1..=j + km {
                ab[at(i, j)] /= d;
            }
            for c in j + 1..=ju {
                let t = ab[at(j, c)];
                if t != 0.0 {
                    for i in j + 1..=j + km {
                        ab[at(i, c)] -= ab[at(i, j)] * t;
                    }
                }
            }
        }
        Ok(BandLu { m: self, piv })
    }
}

#[derive(Debug, Clone)]
pub struct BandLu {
    m: BandMatrix,
    piv: Vec<usize>,
}

impl BandLu {
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let BandMatrix { n, kl, ku, ldab, ref ab } = self.m;
        let kv = kl + ku;
        let at = |i: usize, j: usize| kv + i - j + j * ldab;
        for j in 0..n {
            let p = self.piv[j];
            if p != j {
                b.swap(p, j);
            }
            let km = kl.min(n - 1 - j);
            let bj = b[j];
            for i in j + 1..=j + km {
                b[i] -= ab[at(i, j)] * bj;
            }
        }
        for j in (0..n).rev() {
            b[j] /= ab[at(j, j)];
            let bj = b[j];
            let lo = j.saturating_sub(kv);
            for i in lo..j {
                b[i] -= ab[at(i, j)] * bj;
            }
        }
    }
}
