//! Column filtering primitives of the dual-tree transform: non-decimating
//! filtering, two-tree decimation and two-tree interpolation, all with
//! symmetric extension (end samples repeated).

use crate::numerics::RealImage;
use crate::par;

/// Symmetric extension index with repeated end samples, period 2n.
#[inline]
pub(crate) fn sym_index(i: isize, n: usize) -> usize {
    let period = 2 * n as isize;
    let m = i.rem_euclid(period) as usize;
    if m < n {
        m
    } else {
        2 * n - 1 - m
    }
}

/// 'Valid' convolution: out[k] = sum_j h[j] * x[k + len(h) - 1 - j].
#[inline]
fn conv_valid_into(x: &[f64], h: &[f64], out: &mut [f64], stride: usize, offset: usize) {
    let m = h.len();
    let n_out = x.len() + 1 - m;
    for k in 0..n_out {
        let mut acc = 0.0;
        for (j, &hj) in h.iter().enumerate() {
            acc += hj * x[k + m - 1 - j];
        }
        out[offset + k * stride] = acc;
    }
}

fn even_taps(h: &[f64]) -> Vec<f64> {
    h.iter().step_by(2).copied().collect()
}

fn odd_taps(h: &[f64]) -> Vec<f64> {
    h.iter().skip(1).step_by(2).copied().collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Non-decimated filtering of one column. Output length is `x.len()` for odd
/// filters and `x.len() + 1` for even ones.
pub fn colfilter_1d(x: &[f64], h: &[f64]) -> Vec<f64> {
    let r = x.len();
    let m = h.len();
    let m2 = m / 2;
    let ext: Vec<f64> = (0..r + 2 * m2)
        .map(|j| x[sym_index(j as isize - m2 as isize, r)])
        .collect();
    let mut out = vec![0.0; ext.len() + 1 - m];
    conv_valid_into(&ext, h, &mut out, 1, 0);
    out
}

/// Two-tree decimation by 2 of one column; `ha` filters the odd tree and
/// `hb` the even tree. Requires `x.len() % 4 == 0`.
pub fn coldfilt_1d(x: &[f64], ha: &[f64], hb: &[f64]) -> Vec<f64> {
    let r = x.len();
    let m = ha.len();
    debug_assert!(r % 4 == 0 && m % 2 == 0 && hb.len() == m);
    let ext: Vec<f64> = (0..r + 2 * m)
        .map(|j| x[sym_index(j as isize - m as isize, r)])
        .collect();
    let (hao, hae) = (even_taps(ha), odd_taps(ha));
    let (hbo, hbe) = (even_taps(hb), odd_taps(hb));
    let t: Vec<usize> = (5..r + 2 * m - 2).step_by(4).collect();
    let pick = |off: usize| -> Vec<f64> { t.iter().map(|&ti| ext[ti - off]).collect() };
    let (a1, a3, a0, a2) = (pick(1), pick(3), pick(0), pick(2));
    let r2 = r / 2;
    let mut ya = vec![0.0; r2 / 2];
    let mut tmp = vec![0.0; r2 / 2];
    conv_valid_into(&a1, &hao, &mut ya, 1, 0);
    conv_valid_into(&a3, &hae, &mut tmp, 1, 0);
    ya.iter_mut().zip(&tmp).for_each(|(a, b)| *a += b);
    let mut yb = vec![0.0; r2 / 2];
    conv_valid_into(&a0, &hbo, &mut yb, 1, 0);
    conv_valid_into(&a2, &hbe, &mut tmp, 1, 0);
    yb.iter_mut().zip(&tmp).for_each(|(a, b)| *a += b);

    let (first, second) = if dot(ha, hb) > 0.0 { (&ya, &yb) } else { (&yb, &ya) };
    let mut y = vec![0.0; r2];
    for k in 0..r2 / 2 {
        y[2 * k] = first[k];
        y[2 * k + 1] = second[k];
    }
    y
}

/// Two-tree interpolation by 2 of one column. Requires an even length.
pub fn colifilt_1d(x: &[f64], ha: &[f64], hb: &[f64]) -> Vec<f64> {
    let r = x.len();
    let m = ha.len();
    debug_assert!(r % 2 == 0 && m % 2 == 0 && hb.len() == m);
    let m2 = m / 2;
    let ext: Vec<f64> = (0..r + 2 * m2)
        .map(|j| x[sym_index(j as isize - m2 as isize, r)])
        .collect();
    let (hao, hae) = (even_taps(ha), odd_taps(ha));
    let (hbo, hbe) = (even_taps(hb), odd_taps(hb));
    let positive = dot(ha, hb) > 0.0;
    let mut y = vec![0.0; 2 * r];
    let seq = |idx: &[usize]| -> Vec<f64> { idx.iter().map(|&i| ext[i]).collect() };

    if m2 % 2 == 0 {
        let t: Vec<usize> = (3..r + m).step_by(2).collect();
        let (ta, tb): (Vec<usize>, Vec<usize>) = if positive {
            (t.clone(), t.iter().map(|v| v - 1).collect())
        } else {
            (t.iter().map(|v| v - 1).collect(), t.clone())
        };
        let tb2: Vec<usize> = tb.iter().map(|v| v - 2).collect();
        let ta2: Vec<usize> = ta.iter().map(|v| v - 2).collect();
        conv_valid_into(&seq(&tb2), &hae, &mut y, 4, 0);
        conv_valid_into(&seq(&ta2), &hbe, &mut y, 4, 1);
        conv_valid_into(&seq(&tb), &hao, &mut y, 4, 2);
        conv_valid_into(&seq(&ta), &hbo, &mut y, 4, 3);
    } else {
        let t: Vec<usize> = (2..r + m - 1).step_by(2).collect();
        let (ta, tb): (Vec<usize>, Vec<usize>) = if positive {
            (t.clone(), t.iter().map(|v| v - 1).collect())
        } else {
            (t.iter().map(|v| v - 1).collect(), t.clone())
        };
        let (sa, sb) = (seq(&ta), seq(&tb));
        conv_valid_into(&sb, &hao, &mut y, 4, 0);
        conv_valid_into(&sa, &hbo, &mut y, 4, 1);
        conv_valid_into(&sb, &hae, &mut y, 4, 2);
        conv_valid_into(&sa, &hbe, &mut y, 4, 3);
    }
    y
}

/// Applies a 1-D column operation to every column of `x`.
fn map_columns(x: &RealImage, f: impl Fn(&[f64]) -> Vec<f64> + Sync + Send) -> RealImage {
    let (h, w) = x.dims();
    let cols: Vec<Vec<f64>> = par::map_range(w, |c| {
        let col: Vec<f64> = (0..h).map(|r| x.get(r, c)).collect();
        f(&col)
    });
    let out_h = cols.first().map_or(0, Vec::len);
    RealImage::from_fn(out_h, w, |r, c| cols[c][r])
}

pub fn colfilter(x: &RealImage, h: &[f64]) -> RealImage {
    map_columns(x, |col| colfilter_1d(col, h))
}

pub fn coldfilt(x: &RealImage, ha: &[f64], hb: &[f64]) -> RealImage {
    map_columns(x, |col| coldfilt_1d(col, ha, hb))
}

pub fn colifilt(x: &RealImage, ha: &[f64], hb: &[f64]) -> RealImage {
    map_columns(x, |col| colifilt_1d(col, ha, hb))
}
