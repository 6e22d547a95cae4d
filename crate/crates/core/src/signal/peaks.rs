use super::TimeSeries;

/// Strict local maxima at or above `min_height`, thinned so that retained
/// peaks are at least `min_distance` samples apart.
///
/// A flat-topped maximum reports its leftmost sample. Thinning keeps the
/// tallest peaks first; equal heights prefer the earlier index. End samples
/// never qualify since they lack a neighbour on one side.
pub fn find_peaks(s: &TimeSeries, min_height: f64, min_distance: usize) -> Vec<usize> {
    find_peaks_in(s.samples(), min_height, min_distance)
}

pub(crate) fn find_peaks_in(x: &[f64], min_height: f64, min_distance: usize) -> Vec<usize> {
    let min_distance = min_distance.max(1);
    let candidates: Vec<usize> = local_maxima(x)
        .into_iter()
        .filter(|&i| x[i] >= min_height)
        .collect();
    if min_distance == 1 {
        return candidates;
    }

    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.sort_by(|&a, &b| {
        x[candidates[b]]
            .total_cmp(&x[candidates[a]])
            .then(candidates[a].cmp(&candidates[b]))
    });
    let mut keep = vec![true; candidates.len()];
    for &c in &order {
        if !keep[c] {
            continue;
        }
        let at = candidates[c];
        // Suppress neighbours on both sides that are too close.
        let mut j = c;
        while j > 0 && at - candidates[j - 1] < min_distance {
            j -= 1;
            keep[j] = false;
        }
        let mut j = c + 1;
        while j < candidates.len() && candidates[j] - at < min_distance {
            keep[j] = false;
            j += 1;
        }
    }
    candidates
        .into_iter()
        .zip(keep)
        .filter_map(|(i, k)| k.then_some(i))
        .collect()
}

fn local_maxima(x: &[f64]) -> Vec<usize> {
    let n = x.len();
    let mut out = Vec::new();
    let mut i = 1;
    while i + 1 < n {
        if x[i - 1] < x[i] {
            let mut ahead = i + 1;
            while ahead + 1 < n && x[ahead] == x[i] {
                ahead += 1;
            }
            if x[ahead] < x[i] {
                out.push(i);
            }
            i = ahead;
        } else {
            i += 1;
        }
    }
    out
}
