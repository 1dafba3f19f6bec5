use twofloat::TwoFloat;

fn abs(x: TwoFloat) -> TwoFloat {
    if x.hi() < 0.0 {
        -x
    } else {
        x
    }
}

/// Singular values of a dense matrix by one-sided Jacobi rotations in
/// double-double arithmetic, largest first.
pub fn singular_values(rows: &[Vec<TwoFloat>], cols: usize) -> Vec<TwoFloat> {
    let m = rows.len();
    if m == 0 || cols == 0 {
        return Vec::new();
    }
    // Orthogonalize along the smaller dimension.
    let vectors: Vec<Vec<TwoFloat>> = if cols <= m {
        (0..cols).map(|c| rows.iter().map(|r| r[c]).collect()).collect()
    } else {
        rows.to_vec()
    };
    let mut a = vectors;
    let n = a.len();
    let zero = TwoFloat::from(0.0);
    let eps = 1e-30;
    for _sweep in 0..80 {
        let mut rotated = false;
        for i in 0..n {
            for j in i + 1..n {
                let (mut alpha, mut beta, mut gamma) = (zero, zero, zero);
                for (x, y) in a[i].iter().zip(&a[j]) {
                    alpha += *x * *x;
                    beta += *y * *y;
                    gamma += *x * *y;
                }
                if alpha == zero || beta == zero || abs(gamma).hi() <= eps * (alpha.hi() * beta.hi()).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (gamma * 2.0);
                let sign = if zeta.hi() >= 0.0 { 1.0 } else { -1.0 };
                // zeta^2 overflows double-double long before zeta does.
                let t = if abs(zeta).hi() > 1e150 {
                    TwoFloat::from(sign) / (abs(zeta) * 2.0)
                } else {
                    TwoFloat::from(sign) / (abs(zeta) + (TwoFloat::from(1.0) + zeta * zeta).sqrt())
                };
                let c = TwoFloat::from(1.0) / (TwoFloat::from(1.0) + t * t).sqrt();
                let s = c * t;
                let (left, right) = a.split_at_mut(j);
                for (x, y) in left[i].iter_mut().zip(right[0].iter_mut()) {
                    let xi = *x;
                    let yj = *y;
                    *x = c * xi - s * yj;
                    *y = s * xi + c * yj;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<TwoFloat> = a
        .iter()
        .map(|v| {
            let ss = v.iter().fold(zero, |acc, x| acc + *x * *x);
            if ss == zero {
                zero
            } else {
                ss.sqrt()
            }
        })
        .collect();
    sv.sort_by(|x, y| y.partial_cmp(x).unwrap_or(std::cmp::Ordering::Equal));
    sv
}

/// Scale each row, then each column, to unit max-norm. Rank is unchanged;
/// entries spanning many orders of magnitude become comparable.
pub fn equilibrate(rows: &mut [Vec<TwoFloat>], cols: usize) {
    let zero = TwoFloat::from(0.0);
    for r in rows.iter_mut() {
        let mx = r.iter().fold(zero, |acc, &x| if abs(x) > acc { abs(x) } else { acc });
        if mx != zero {
            r.iter_mut().for_each(|x| *x /= mx);
        }
    }
    for c in 0..cols {
        let mx = rows
            .iter()
            .fold(zero, |acc, r| if abs(r[c]) > acc { abs(r[c]) } else { acc });
        if mx != zero {
            rows.iter_mut().for_each(|r| r[c] /= mx);
        }
    }
}

/// Numerical rank: singular values above `rel_tol` times the largest,
/// after equilibration.
pub fn rank_float(rows: &[Vec<TwoFloat>], cols: usize, rel_tol: f64) -> usize {
    let mut scaled = rows.to_vec();
    equilibrate(&mut scaled, cols);
    let sv = singular_values(&scaled, cols);
    let Some(&top) = sv.first() else {
        return 0;
    };
    if top.hi() == 0.0 {
        return 0;
    }
    sv.iter().filter(|s| s.hi() > rel_tol * top.hi()).count()
}
