use crate::error::{Error, Result};

/// Square band matrix with equal lower and upper half-bandwidth.
///
/// Row `i` stores columns `i - hb ..= i + hb` at offsets `0 ..= 2 hb`.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedMatrix {
    order: usize,
    half_bandwidth: usize,
    bands: Vec<f64>,
}

impl BandedMatrix {
    pub fn zeros(order: usize, half_bandwidth: usize) -> Self {
        BandedMatrix {
            order,
            half_bandwidth,
            bands: vec![0.0; order * (2 * half_bandwidth + 1)],
        }
    }

    pub fn identity(order: usize) -> Self {
        let mut m = Self::zeros(order, 0);
        for i in 0..order {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn half_bandwidth(&self) -> usize {
        self.half_bandwidth
    }

    fn width(&self) -> usize {
        2 * self.half_bandwidth + 1
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        let hb = self.half_bandwidth;
        if i >= self.order || j >= self.order || j + hb < i || j > i + hb {
            None
        } else {
            Some(i * self.width() + (j + hb - i))
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.slot(i, j).map_or(0.0, |s| self.bands[s])
    }

    /// Panics if `(i, j)` lies outside the band.
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        let s = self.slot(i, j).unwrap_or_else(|| {
            panic!(
                "({i}, {j}) outside band of half-width {}",
                self.half_bandwidth
            )
        });
        self.bands[s] = value;
    }

    pub fn add(&mut self, i: usize, j: usize, value: f64) {
        let s = self.slot(i, j).unwrap_or_else(|| {
            panic!(
                "({i}, {j}) outside band of half-width {}",
                self.half_bandwidth
            )
        });
        self.bands[s] += value;
    }

    /// Iterates `(i, j, a_ij)` over the stored band.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let hb = self.half_bandwidth;
        (0..self.order).flat_map(move |i| {
            let lo = i.saturating_sub(hb);
            let hi = (i + hb).min(self.order - 1);
            (lo..=hi).map(move |j| (i, j, self.get(i, j)))
        })
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.order);
        let hb = self.half_bandwidth;
        let w = self.width();
        (0..self.order)
            .map(|i| {
                let lo = i.saturating_sub(hb);
                let hi = (i + hb).min(self.order - 1);
                let row = &self.bands[i * w..(i + 1) * w];
                (lo..=hi).map(|j| row[j + hb - i] * x[j]).sum()
            })
            .collect()
    }

    pub fn transpose(&self) -> BandedMatrix {
        let mut t = BandedMatrix::zeros(self.order, self.half_bandwidth);
        for (i, j, v) in self.entries() {
            t.set(j, i, v);
        }
        t
    }

    pub fn scaled(&self, s: f64) -> BandedMatrix {
        let mut m = self.clone();
        m.bands.iter_mut().for_each(|v| *v *= s);
        m
    }

    /// `self + s * other`; `other` must not be wider than `self`.
    pub fn add_scaled(&mut self, s: f64, other: &BandedMatrix) {
        assert_eq!(self.order, other.order);
        assert!(other.half_bandwidth <= self.half_bandwidth);
        for (i, j, v) in other.entries() {
            self.add(i, j, s * v);
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.bands.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.entries()
            .all(|(i, j, v)| (v - self.get(j, i)).abs() <= tol)
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.matvec(&vec![1.0; self.order])
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.order]; self.order];
        for (i, j, v) in self.entries() {
            d[i][j] = v;
        }
        d
    }

    pub fn factor(&self) -> Result<BandedLu> {
        BandedLu::new(self)
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        Ok(self.factor()?.solve(rhs))
    }
}

pub fn solve_banded(system: &BandedMatrix, rhs: &[f64]) -> Result<Vec<f64>> {
    system.solve(rhs)
}

/// LU factors with partial pivoting, stored column-wise in LAPACK `gbtrf` layout
/// (`kl` extra super-diagonals hold the fill from row interchanges).
#[derive(Debug, Clone)]
pub struct BandedLu {
    order: usize,
    kl: usize,
    ku: usize,
    ld: usize,
    ab: Vec<f64>,
    pivots: Vec<usize>,
}

/// Pivots smaller than this times the largest matrix entry are treated as zero.
const PIVOT_RELATIVE_FLOOR: f64 = 1e-14;

impl BandedLu {
    fn new(a: &BandedMatrix) -> Result<Self> {
        let n = a.order;
        let kl = a.half_bandwidth;
        let ku = a.half_bandwidth;
        let ld = 2 * kl + ku + 1;
        let mut lu = BandedLu {
            order: n,
            kl,
            ku,
            ld,
            ab: vec![0.0; ld * n],
            pivots: vec![0; n],
        };
        for (i, j, v) in a.entries() {
            *lu.at(i, j) = v;
        }
        let threshold = PIVOT_RELATIVE_FLOOR * a.max_abs();
        let upper = kl + ku;

        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = lu.get(k, k).abs();
            for i in k + 1..=last_row {
                let v = lu.get(i, k).abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if !(best > threshold) {
                return Err(Error::Singular {
                    row: k,
                    pivot: best,
                    threshold,
                });
            }
            lu.pivots[k] = p;
            let last_col = (k + upper).min(n - 1);
            if p != k {
                for j in k..=last_col {
                    let a_kj = lu.get(k, j);
                    let a_pj = lu.get(p, j);
                    *lu.at(k, j) = a_pj;
                    *lu.at(p, j) = a_kj;
                }
            }
            let pivot = lu.get(k, k);
            for i in k + 1..=last_row {
                let l = lu.get(i, k) / pivot;
                *lu.at(i, k) = l;
                if l != 0.0 {
                    for j in k + 1..=last_col {
                        let u = lu.get(k, j);
                        *lu.at(i, j) -= l * u;
                    }
                }
            }
        }
        Ok(lu)
    }

    #[inline]
    fn index(&self, i: usize, j: usize) -> usize {
        // valid for j - (kl + ku) <= i <= j + kl
        j * self.ld + (self.kl + self.ku + i - j)
    }

    #[inline]
    fn get(&self, i: usize, j: usize) -> f64 {
        self.ab[self.index(i, j)]
    }

    #[inline]
    fn at(&mut self, i: usize, j: usize) -> &mut f64 {
        let idx = self.index(i, j);
        &mut self.ab[idx]
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        assert_eq!(rhs.len(), self.order);
        let n = self.order;
        let mut b = rhs.to_vec();
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                b.swap(k, p);
            }
            let bk = b[k];
            if bk != 0.0 {
                for i in k + 1..=(k + self.kl).min(n - 1) {
                    b[i] -= self.get(i, k) * bk;
                }
            }
        }
        for k in (0..n).rev() {
            let mut acc = b[k];
            for j in k + 1..=(k + self.kl + self.ku).min(n - 1) {
                acc -= self.get(k, j) * b[j];
            }
            b[k] = acc / self.get(k, k);
        }
        b
    }
}
