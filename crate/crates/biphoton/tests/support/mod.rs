//! Test-only dense eigensolver oracle: complex Hessenberg reduction followed
//! by Wilkinson-shifted QR iteration with Givens rotations. Generic in n, so
//! it shares no code path with the closed-form eigenvalue expressions it
//! cross-checks.

use num_complex::Complex64 as C64;

/// Complex Givens rotation (c real, s complex) with
/// [c s; -conj(s) c]·[f; g] = [r; 0].
fn givens(f: C64, g: C64) -> (f64, C64) {
    if g.norm() == 0.0 {
        return (1.0, C64::new(0.0, 0.0));
    }
    if f.norm() == 0.0 {
        return (0.0, g.conj() / g.norm());
    }
    let t = (f.norm_sqr() + g.norm_sqr()).sqrt();
    let phase = f / f.norm();
    (f.norm() / t, phase * g.conj() / t)
}

/// Similarity-reduce to upper Hessenberg form in place.
fn hessenberg(h: &mut [Vec<C64>]) {
    let n = h.len();
    for j in 0..n.saturating_sub(2) {
        for i in (j + 2)..n {
            let (c, s) = givens(h[j + 1][j], h[i][j]);
            for col in 0..n {
                let a = h[j + 1][col];
                let b = h[i][col];
                h[j + 1][col] = c * a + s * b;
                h[i][col] = -s.conj() * a + c * b;
            }
            for row in 0..n {
                let a = h[row][j + 1];
                let b = h[row][i];
                h[row][j + 1] = c * a + s.conj() * b;
                h[row][i] = -s * a + c * b;
            }
        }
    }
}

/// Eigenvalues of the trailing 2x2 block; returns the one closer to d
/// (Wilkinson shift).
fn wilkinson_shift(a: C64, b: C64, c: C64, d: C64) -> C64 {
    let tr = 0.5 * (a + d);
    let disc = (0.5 * (a - d) * 0.5 * (a - d) + b * c).sqrt();
    let l1 = tr + disc;
    let l2 = tr - disc;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// One shifted QR step on the leading m x m active block.
fn qr_step(h: &mut [Vec<C64>], m: usize, shift: C64) {
    for k in 0..m {
        h[k][k] -= shift;
    }
    let mut rots = Vec::with_capacity(m - 1);
    for k in 0..m - 1 {
        let (c, s) = givens(h[k][k], h[k + 1][k]);
        for col in 0..m {
            let a = h[k][col];
            let b = h[k + 1][col];
            h[k][col] = c * a + s * b;
            h[k + 1][col] = -s.conj() * a + c * b;
        }
        rots.push((c, s));
    }
    for (k, (c, s)) in rots.into_iter().enumerate() {
        for row in 0..m {
            let a = h[row][k];
            let b = h[row][k + 1];
            h[row][k] = c * a + s.conj() * b;
            h[row][k + 1] = -s * a + c * b;
        }
    }
    for k in 0..m {
        h[k][k] += shift;
    }
}

/// Eigenvalues of a dense complex matrix, sorted by (re, im).
pub fn qr_eigenvalues(a: &[Vec<C64>]) -> Vec<C64> {
    let n = a.len();
    assert!(n > 0 && a.iter().all(|row| row.len() == n));
    let mut h: Vec<Vec<C64>> = a.to_vec();
    hessenberg(&mut h);
    let mut eigs = Vec::with_capacity(n);
    let mut m = n;
    let mut stall = 0usize;
    while m > 1 {
        let off = h[m - 1][m - 2].norm();
        let scale = h[m - 2][m - 2].norm() + h[m - 1][m - 1].norm();
        if off <= 1e-16 * scale.max(1e-300) {
            eigs.push(h[m - 1][m - 1]);
            m -= 1;
            stall = 0;
            continue;
        }
        assert!(stall < 200, "QR iteration failed to converge");
        let shift = if stall % 17 == 16 {
            // Ad-hoc exceptional shift to break rare symmetric stalls.
            h[m - 1][m - 1] + C64::new(off, off)
        } else {
            wilkinson_shift(
                h[m - 2][m - 2],
                h[m - 2][m - 1],
                h[m - 1][m - 2],
                h[m - 1][m - 1],
            )
        };
        qr_step(&mut h, m, shift);
        stall += 1;
    }
    eigs.push(h[0][0]);
    sort_complex(&mut eigs);
    eigs
}

pub fn sort_complex(v: &mut [C64]) {
    v.sort_by(|a, b| {
        a.re.partial_cmp(&b.re)
            .unwrap()
            .then(a.im.partial_cmp(&b.im).unwrap())
    });
}
