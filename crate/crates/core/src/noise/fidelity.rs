use crate::error::{Error, Result};
use crate::sim::DensityMatrix;

/// Largest negative eigenvalue tolerated before an input is rejected.
const PSD_TOLERANCE: f64 = 1e-9;
const PURITY_TOLERANCE: f64 = 1e-10;
/// Eigenvalues below this are rounding noise of a rank-deficient matrix;
/// their square roots (~1e-8) would otherwise dominate the error.
const ZERO_EIGENVALUE: f64 = 1e-13;

fn root(l: f64) -> f64 {
    if l < ZERO_EIGENVALUE {
        0.0
    } else {
        l.sqrt()
    }
}

/// Uhlmann fidelity (tr √(√ρ σ √ρ))².
///
/// When either argument is pure the value is tr(ρσ). Otherwise the square
/// roots come from Jacobi eigendecompositions of the real symmetric
/// embedding [[A, −B], [B, A]] of each Hermitian A + iB, in which every
/// eigenvalue appears twice.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::Shape(format!("fidelity of {}- and {}-dimensional states", rho.dim(), sigma.dim())));
    }
    if (rho.purity() - 1.0).abs() < PURITY_TOLERANCE || (sigma.purity() - 1.0).abs() < PURITY_TOLERANCE {
        let (pure, other) = if (rho.purity() - 1.0).abs() < PURITY_TOLERANCE { (rho, sigma) } else { (sigma, rho) };
        check_psd(other)?;
        // tr(AB) = Σ_rc A_rc B_cr
        let dim = rho.dim();
        let mut acc = 0.0;
        for r in 0..dim {
            for c in 0..dim {
                acc += (pure.entry(r, c) * other.entry(c, r)).re;
            }
        }
        return Ok(acc.clamp(0.0, 1.0));
    }
    let (vals, vecs) = jacobi_eigen(embed(rho))?;
    if vals.iter().any(|&l| l < -PSD_TOLERANCE) {
        return Err(Error::Domain("first argument is not positive semidefinite".into()));
    }
    let n = vals.len();
    // √ρ = V diag(√λ) Vᵀ
    let mut sqrt_rho = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            sqrt_rho[i * n + j] = (0..n).map(|k| vecs[i * n + k] * root(vals[k]) * vecs[j * n + k]).sum();
        }
    }
    let s = embed(sigma);
    let m = matmul(&matmul(&sqrt_rho, &s, n), &sqrt_rho, n);
    let (mvals, _) = jacobi_eigen(m)?;
    if mvals.iter().any(|&l| l < -PSD_TOLERANCE) {
        return Err(Error::Domain("second argument is not positive semidefinite".into()));
    }
    let root_trace: f64 = mvals.iter().map(|&l| root(l)).sum::<f64>() / 2.0;
    Ok((root_trace * root_trace).clamp(0.0, 1.0))
}

/// (Σ √(p_i q_i))² for two distributions over the same outcomes.
pub fn classical_fidelity(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::Shape("distributions differ in length".into()));
    }
    let bc: f64 = p.iter().zip(q).map(|(a, b)| (a.max(0.0) * b.max(0.0)).sqrt()).sum();
    Ok((bc * bc).clamp(0.0, 1.0))
}

/// Eigenvalues of a density matrix, ascending.
pub fn hermitian_eigenvalues(rho: &DensityMatrix) -> Result<Vec<f64>> {
    let (vals, _) = jacobi_eigen(embed(rho))?;
    let mut v = vals;
    v.sort_by(f64::total_cmp);
    // every eigenvalue of the embedding is doubled
    Ok(v.into_iter().step_by(2).collect())
}

fn check_psd(rho: &DensityMatrix) -> Result<()> {
    // cheap necessary condition first
    if rho.diagonal().iter().any(|&d| d < -PSD_TOLERANCE) {
        return Err(Error::Domain("density matrix has a negative diagonal".into()));
    }
    if rho.dim() <= 64 && hermitian_eigenvalues(rho)?.first().is_some_and(|&l| l < -PSD_TOLERANCE) {
        return Err(Error::Domain("density matrix is not positive semidefinite".into()));
    }
    Ok(())
}

fn embed(rho: &DensityMatrix) -> Vec<f64> {
    let d = rho.dim();
    let n = 2 * d;
    let mut m = vec![0.0; n * n];
    for r in 0..d {
        for c in 0..d {
            let e = rho.entry(r, c);
            m[r * n + c] = e.re;
            m[(r + d) * n + c + d] = e.re;
            m[r * n + c + d] = -e.im;
            m[(r + d) * n + c] = e.im;
        }
    }
    m
}

fn matmul(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            let x = a[i * n + k];
            if x == 0.0 {
                continue;
            }
            for j in 0..n {
                out[i * n + j] += x * b[k * n + j];
            }
        }
    }
    out
}

/// Cyclic Jacobi for a real symmetric matrix. Returns eigenvalues and the
/// eigenvectors as the columns of a row-major matrix.
fn jacobi_eigen(mut a: Vec<f64>) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = (a.len() as f64).sqrt() as usize;
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let scale: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j].powi(2))
            .sum();
        if off.sqrt() <= 1e-15 * scale {
            return Ok(((0..n).map(|i| a[i * n + i]).collect(), v));
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k * n + p], a[k * n + q]);
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p * n + k], a[q * n + k]);
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[k * n + p], v[k * n + q]);
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    Err(Error::Domain("Jacobi eigensolver did not converge".into()))
}
