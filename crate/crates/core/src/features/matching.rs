use super::Descriptor;

/// Default Hamming acceptance threshold.
pub const DEFAULT_MAX_DISTANCE: u32 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Match {
    pub index_a: usize,
    pub index_b: usize,
    pub distance: u32,
}

/// Nearest descriptor in `set` to `d`; ties go to the lower index.
fn nearest(d: &Descriptor, set: &[Descriptor]) -> Option<(usize, u32)> {
    set.iter()
        .enumerate()
        .map(|(i, e)| (i, d.hamming(e)))
        .min_by_key(|&(i, dist)| (dist, i))
}

/// Mutual nearest-neighbor matches within `max_distance`, ordered by
/// index in `a`. Each descriptor appears in at most one match.
pub fn match_descriptors(a: &[Descriptor], b: &[Descriptor], max_distance: u32) -> Vec<Match> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let back: Vec<usize> = b.iter().map(|d| nearest(d, a).expect("a is nonempty").0).collect();
    a.iter()
        .enumerate()
        .filter_map(|(i, d)| {
            let (j, dist) = nearest(d, b)?;
            (back[j] == i && dist <= max_distance).then_some(Match {
                index_a: i,
                index_b: j,
                distance: dist,
            })
        })
        .collect()
}
