use std::collections::BTreeSet;

use super::field::ProbField;
use crate::error::{Error, Result};

/// Per-pixel movable flag, row-major. `true` marks a movable-object pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    data: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize, data: Vec<bool>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid("mask dimensions must be positive"));
        }
        if data.len() != width * height {
            return Err(Error::invalid(format!(
                "mask buffer has {} entries, expected {}",
                data.len(),
                width * height
            )));
        }
        Ok(Self { width, height, data })
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self::filled(width, height, false)
    }

    pub fn ones(width: usize, height: usize) -> Self {
        Self::filled(width, height, true)
    }

    pub fn filled(width: usize, height: usize, value: bool) -> Self {
        assert!(width > 0 && height > 0, "mask dimensions must be positive");
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        assert!(width > 0 && height > 0, "mask dimensions must be positive");
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self { width, height, data }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[bool] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.data[y * self.width + x]
    }

    /// Mask value at a signed coordinate; `None` outside the mask.
    #[inline]
    pub fn get_checked(&self, x: i64, y: i64) -> Option<bool> {
        if x < 0 || y < 0 || x >= self.width as i64 || y >= self.height as i64 {
            None
        } else {
            Some(self.get(x as usize, y as usize))
        }
    }

    pub fn count_ones(&self) -> usize {
        self.data.iter().filter(|v| **v).count()
    }

    /// Intersection over union; two empty masks score 1.
    pub fn iou(&self, other: &BinaryMask) -> f64 {
        assert_eq!((self.width, self.height), (other.width, other.height));
        let (mut inter, mut union) = (0usize, 0usize);
        for (a, b) in self.data.iter().zip(&other.data) {
            inter += (*a && *b) as usize;
            union += (*a || *b) as usize;
        }
        if union == 0 {
            1.0
        } else {
            inter as f64 / union as f64
        }
    }
}

/// The label ids treated as movable objects.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MovableClassSet {
    labels: BTreeSet<usize>,
    names: Vec<String>,
}

/// The 21 PASCAL VOC labels, background first.
pub const VOC_LABELS: [&str; 21] = [
    "background",
    "aeroplane",
    "bicycle",
    "bird",
    "boat",
    "bottle",
    "bus",
    "car",
    "cat",
    "chair",
    "cow",
    "diningtable",
    "dog",
    "horse",
    "motorbike",
    "person",
    "pottedplant",
    "sheep",
    "sofa",
    "train",
    "tvmonitor",
];

/// Movable object classes among the VOC labels.
pub const VOC_MOVABLE: [&str; 6] = ["aeroplane", "bicycle", "bus", "car", "motorbike", "person"];

impl MovableClassSet {
    pub fn new(labels: impl IntoIterator<Item = (usize, String)>) -> Result<Self> {
        let mut set = BTreeSet::new();
        let mut names = Vec::new();
        for (id, name) in labels {
            if !set.insert(id) {
                return Err(Error::invalid(format!("label {id} listed twice")));
            }
            names.push(name);
        }
        Ok(Self { labels: set, names })
    }

    pub fn from_indices(indices: &[usize]) -> Result<Self> {
        Self::new(indices.iter().map(|&i| (i, format!("label{i}"))))
    }

    pub fn empty() -> Self {
        Self {
            labels: BTreeSet::new(),
            names: Vec::new(),
        }
    }

    /// aeroplane, bicycle, bus, car, motorbike and person over [`VOC_LABELS`].
    pub fn voc_default() -> Self {
        Self::from_names(&VOC_LABELS, &VOC_MOVABLE).expect("movable names are VOC labels")
    }

    /// Looks each of `movable` up in `all_labels`.
    pub fn from_names(all_labels: &[&str], movable: &[&str]) -> Result<Self> {
        Self::new(movable.iter().map(|name| {
            let id = all_labels.iter().position(|l| l == name);
            (id.unwrap_or(usize::MAX), name.to_string())
        }))
        .and_then(|set| {
            if set.labels.contains(&usize::MAX) {
                Err(Error::invalid("unknown movable class name"))
            } else {
                Ok(set)
            }
        })
    }

    pub fn contains(&self, label: usize) -> bool {
        self.labels.contains(&label)
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.labels.iter().copied()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn max_index(&self) -> Option<usize> {
        self.labels.iter().next_back().copied()
    }
}

/// Marks every pixel whose most probable label is movable.
pub fn binarize_movable(q: &ProbField, classes: &MovableClassSet) -> Result<BinaryMask> {
    if let Some(max) = classes.max_index() {
        if max >= q.num_labels() {
            return Err(Error::invalid(format!(
                "movable label {max} out of range for {} labels",
                q.num_labels()
            )));
        }
    }
    let data = (0..q.num_pixels()).map(|i| classes.contains(q.argmax(i))).collect();
    BinaryMask::new(q.width(), q.height(), data)
}

/// Dilation with a `(2r+1)x(2r+1)` square, computed as two 1-D max passes.
pub fn dilate_mask(mask: &BinaryMask, radius: usize) -> BinaryMask {
    if radius == 0 {
        return mask.clone();
    }
    let (w, h) = (mask.width, mask.height);
    let mut rows = vec![false; w * h];
    for y in 0..h {
        let row = &mask.data[y * w..(y + 1) * w];
        // Distance back to the most recent set pixel and forward to the next.
        let mut last: Option<usize> = None;
        for x in 0..w {
            if row[x] {
                last = Some(x);
            }
            if last.is_some_and(|l| x - l <= radius) {
                rows[y * w + x] = true;
            }
        }
        let mut next: Option<usize> = None;
        for x in (0..w).rev() {
            if row[x] {
                next = Some(x);
            }
            if next.is_some_and(|n| n - x <= radius) {
                rows[y * w + x] = true;
            }
        }
    }
    let mut out = vec![false; w * h];
    for x in 0..w {
        let mut last: Option<usize> = None;
        for y in 0..h {
            if rows[y * w + x] {
                last = Some(y);
            }
            if last.is_some_and(|l| y - l <= radius) {
                out[y * w + x] = true;
            }
        }
        let mut next: Option<usize> = None;
        for y in (0..h).rev() {
            if rows[y * w + x] {
                next = Some(y);
            }
            if next.is_some_and(|n| n - y <= radius) {
                out[y * w + x] = true;
            }
        }
    }
    BinaryMask {
        width: w,
        height: h,
        data: out,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn voc_movable_indices() {
        let set = MovableClassSet::voc_default();
        assert_eq!(set.indices().collect::<Vec<_>>(), vec![1, 2, 6, 7, 14, 15]);
        assert!(MovableClassSet::from_names(&VOC_LABELS, &["unicorn"]).is_err());
        assert!(MovableClassSet::from_indices(&[1, 1]).is_err());
    }

    #[test]
    fn binarize_examples() {
        let person = 15;
        let q = ProbField::one_hot(4, 3, 21, person);
        let set = MovableClassSet::from_indices(&[person]).unwrap();
        assert_eq!(binarize_movable(&q, &set).unwrap(), BinaryMask::ones(4, 3));

        let bg = ProbField::one_hot(4, 3, 21, 0);
        assert_eq!(binarize_movable(&bg, &set).unwrap(), BinaryMask::zeros(4, 3));

        let tie = ProbField::new(1, 1, 2, vec![0.5, 0.5]).unwrap();
        let car = MovableClassSet::from_indices(&[1]).unwrap();
        assert!(!binarize_movable(&tie, &car).unwrap().get(0, 0));

        assert!(binarize_movable(&tie, &MovableClassSet::from_indices(&[2]).unwrap()).is_err());
    }

    #[test]
    fn dilate_examples() {
        let m = BinaryMask::from_fn(5, 5, |x, y| x == 2 && y == 2);
        assert_eq!(dilate_mask(&m, 0), m);
        let d = dilate_mask(&m, 1);
        let expect = BinaryMask::from_fn(5, 5, |x, y| (1..=3).contains(&x) && (1..=3).contains(&y));
        assert_eq!(d, expect);
        assert_eq!(dilate_mask(&BinaryMask::zeros(6, 4), 3), BinaryMask::zeros(6, 4));
    }

    fn dilate_oracle(m: &BinaryMask, r: usize) -> BinaryMask {
        let r = r as i64;
        BinaryMask::from_fn(m.width(), m.height(), |x, y| {
            (-r..=r).any(|dy| (-r..=r).any(|dx| m.get_checked(x as i64 + dx, y as i64 + dy) == Some(true)))
        })
    }

    proptest! {
        #[test]
        fn dilation_matches_definition(bits in proptest::collection::vec(proptest::bool::weighted(0.08), 13 * 9), r in 0usize..4) {
            let m = BinaryMask::new(13, 9, bits).unwrap();
            prop_assert_eq!(dilate_mask(&m, r), dilate_oracle(&m, r));
        }

        #[test]
        fn empty_class_set_gives_empty_mask(scores in proptest::collection::vec(0.01f64..1.0, 6 * 3)) {
            let q = ProbField::from_scores(3, 2, 3, scores).unwrap();
            prop_assert_eq!(binarize_movable(&q, &MovableClassSet::empty()).unwrap(), BinaryMask::zeros(3, 2));
        }
    }
}
