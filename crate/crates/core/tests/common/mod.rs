//! Independent oracles shared by the integration test targets.
#![allow(dead_code)]

use genius_mediation::stats::DesignMatrix;
use genius_mediation::Dataset;

/// Dense Gauss-Jordan inverse with partial pivoting, independent of nalgebra.
pub fn invert(mut a: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let p = a.len();
    let mut inv: Vec<Vec<f64>> = (0..p).map(|i| (0..p).map(|j| (i == j) as u8 as f64).collect()).collect();
    for col in 0..p {
        let piv = (col..p).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, piv);
        inv.swap(col, piv);
        let d = a[col][col];
        for j in 0..p {
            a[col][j] /= d;
            inv[col][j] /= d;
        }
        for i in 0..p {
            if i != col {
                let f = a[i][col];
                for j in 0..p {
                    a[i][j] -= f * a[col][j];
                    inv[i][j] -= f * inv[col][j];
                }
            }
        }
    }
    inv
}

pub fn rows(x: &DesignMatrix) -> Vec<Vec<f64>> {
    let v = x.values();
    (0..v.nrows()).map(|i| v.row(i).iter().copied().collect()).collect()
}

pub fn xtwx(x: &[Vec<f64>], w: &[f64]) -> Vec<Vec<f64>> {
    let p = x[0].len();
    let mut g = vec![vec![0.0; p]; p];
    for (xi, wi) in x.iter().zip(w) {
        for j in 0..p {
            for k in 0..p {
                g[j][k] += wi * xi[j] * xi[k];
            }
        }
    }
    g
}

pub fn matvec(a: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    a.iter().map(|r| r.iter().zip(v).map(|(x, y)| x * y).sum()).collect()
}

pub fn normal_equations(x: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let inv = invert(xtwx(x, &vec![1.0; n]));
    let p = x[0].len();
    let xty: Vec<f64> = (0..p).map(|j| x.iter().zip(y).map(|(r, yi)| r[j] * yi).sum()).collect();
    matvec(&inv, &xty)
}

/// Root of `sum (A - mean A)(M - mean(M | A))(Y - t M) = 0` by bisection,
/// for a binary exposure and no covariates.
pub fn estimating_equation_root(d: &Dataset) -> f64 {
    let n = d.n();
    let abar = d.a.iter().sum::<f64>() / n as f64;
    let group = |lvl: f64| {
        let (s, k) = d.m.iter().zip(&d.a).filter(|(_, a)| **a == lvl).fold((0.0, 0.0), |(s, k), (m, _)| (s + m, k + 1.0));
        s / k
    };
    let (m0, m1) = (group(0.0), group(1.0));
    let w: Vec<f64> = (0..n)
        .map(|i| (d.a[i] - abar) * (d.m[i] - if d.a[i] == 1.0 { m1 } else { m0 }))
        .collect();
    let g = |t: f64| (0..n).map(|i| w[i] * (d.y[i] - t * d.m[i])).sum::<f64>();
    let (mut lo, mut hi) = (-50.0, 50.0);
    assert!(g(lo).signum() != g(hi).signum(), "root not bracketed");
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid).signum() == g(lo).signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Risk-ratio indirect effect by counting individual `(y, m, a)` records.
pub fn brute_force_rr(records: &[(u8, u8, u8)], a: u8, a_star: u8) -> f64 {
    let count = |f: &dyn Fn(&(u8, u8, u8)) -> bool| records.iter().filter(|r| f(r)).count() as f64;
    let term = |x: u8| -> f64 {
        (0..2u8)
            .map(|m| {
                let p_y = count(&|r| r.0 == 1 && r.1 == m && r.2 == a) / count(&|r| r.1 == m && r.2 == a);
                let p_m = count(&|r| r.1 == m && r.2 == x) / count(&|r| r.2 == x);
                p_y * p_m
            })
            .sum()
    };
    term(a) / term(a_star)
}

