use std::collections::VecDeque;

use super::mask::BinaryMask;
use super::MaskError;

const NEIGHBORS_8: [(i64, i64); 8] = [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)];

/// 8-connected components, each framed like the parent mask, ordered by
/// popcount descending. Equal sizes keep scanline order of each component's
/// first pixel.
pub fn connected_components(mask: &BinaryMask) -> Vec<BinaryMask> {
    let (h, w) = mask.extent();
    let mut label = vec![u32::MAX; h * w];
    let mut comps: Vec<Vec<usize>> = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..h * w {
        if !mask.bits()[start] || label[start] != u32::MAX {
            continue;
        }
        let id = comps.len() as u32;
        let mut members = Vec::new();
        label[start] = id;
        queue.push_back(start);
        while let Some(i) = queue.pop_front() {
            members.push(i);
            let (r, c) = ((i / w) as i64, (i % w) as i64);
            for (dr, dc) in NEIGHBORS_8 {
                let (nr, nc) = (r + dr, c + dc);
                if nr < 0 || nc < 0 || nr >= h as i64 || nc >= w as i64 {
                    continue;
                }
                let j = nr as usize * w + nc as usize;
                if mask.bits()[j] && label[j] == u32::MAX {
                    label[j] = id;
                    queue.push_back(j);
                }
            }
        }
        comps.push(members);
    }
    // Stable sort keeps discovery (scanline) order on ties.
    comps.sort_by(|a, b| b.len().cmp(&a.len()));
    comps
        .into_iter()
        .map(|members| {
            let mut m = BinaryMask::new(mask.origin(), h, w).expect("parent extent is positive");
            for i in members {
                m.set(i / w, i % w, true);
            }
            m
        })
        .collect()
}

/// The two largest components `(M1, M2)` with `|M1| ≥ |M2|`.
pub fn two_largest(mask: &BinaryMask) -> Result<(BinaryMask, BinaryMask), MaskError> {
    let mut comps = connected_components(mask);
    if comps.len() < 2 {
        return Err(MaskError::TooFewObjects { found: comps.len() });
    }
    comps.truncate(2);
    let second = comps.pop().expect("two components");
    let first = comps.pop().expect("two components");
    Ok((first, second))
}
