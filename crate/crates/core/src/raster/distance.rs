//! Exact Euclidean distance transforms on the pixel lattice, using the
//! lower-envelope-of-parabolas algorithm (Felzenszwalb & Huttenlocher) one
//! axis at a time.

use crate::scalar::Scalar;

use super::mask::BinaryMask;

/// One-dimensional squared distance transform of a sampled function `f`.
/// Sites with `f = +inf` are ignored; if every site is infinite the output
/// stays infinite.
fn edt_1d<T: Scalar>(f: &[T], out: &mut [T], sites: &mut Vec<usize>, bounds: &mut Vec<T>) {
    let n = f.len();
    sites.clear();
    bounds.clear();
    let two = T::lit(2.0);
    for q in 0..n {
        if f[q].is_infinite() {
            continue;
        }
        let fq = f[q] + T::lit((q * q) as f64);
        loop {
            let Some(&v) = sites.last() else {
                sites.push(q);
                break;
            };
            let fv = f[v] + T::lit((v * v) as f64);
            let s = (fq - fv) / (two * T::lit(q as f64 - v as f64));
            if s <= *bounds.last().expect("one bound per site") {
                sites.pop();
                bounds.pop();
                continue;
            }
            sites.push(q);
            bounds.push(s);
            break;
        }
        if bounds.len() < sites.len() {
            bounds.push(T::neg_infinity());
        }
    }
    if sites.is_empty() {
        out.iter_mut().for_each(|o| *o = T::infinity());
        return;
    }
    let mut k = 0;
    for (q, o) in out.iter_mut().enumerate() {
        let x = T::lit(q as f64);
        while k + 1 < sites.len() && bounds[k + 1] < x {
            k += 1;
        }
        let d = q as f64 - sites[k] as f64;
        *o = T::lit(d * d) + f[sites[k]];
    }
}

/// Squared Euclidean distance from every pixel of an `h × w` grid to the
/// nearest pixel where `feature` is true. Infinite when there is none.
pub fn squared_distance_transform<T: Scalar>(feature: &[bool], h: usize, w: usize) -> Vec<T> {
    assert_eq!(feature.len(), h * w);
    let mut grid: Vec<T> = feature.iter().map(|&b| if b { T::zero() } else { T::infinity() }).collect();
    let mut sites = Vec::new();
    let mut bounds = Vec::new();
    let mut col = vec![T::zero(); h];
    let mut col_out = vec![T::zero(); h];
    for c in 0..w {
        for r in 0..h {
            col[r] = grid[r * w + c];
        }
        edt_1d(&col, &mut col_out, &mut sites, &mut bounds);
        for r in 0..h {
            grid[r * w + c] = col_out[r];
        }
    }
    let mut row_out = vec![T::zero(); w];
    for r in 0..h {
        edt_1d(&grid[r * w..(r + 1) * w], &mut row_out, &mut sites, &mut bounds);
        grid[r * w..(r + 1) * w].copy_from_slice(&row_out);
    }
    grid
}

/// Signed distance field over the mask's frame: negative inside (distance to
/// the nearest clear pixel), positive outside (distance to the nearest set
/// pixel). Pixels beyond the frame are not considered, so callers that need
/// the exterior to be visible should pad the mask first.
pub fn signed_distance_field<T: Scalar>(mask: &BinaryMask) -> Vec<T> {
    let (h, w) = mask.extent();
    let to_set = squared_distance_transform::<T>(mask.bits(), h, w);
    let clear: Vec<bool> = mask.bits().iter().map(|&b| !b).collect();
    let to_clear = squared_distance_transform::<T>(&clear, h, w);
    mask.bits()
        .iter()
        .zip(to_set.iter().zip(&to_clear))
        .map(|(&inside, (&ds, &dc))| if inside { -dc.sqrt() } else { ds.sqrt() })
        .collect()
}
