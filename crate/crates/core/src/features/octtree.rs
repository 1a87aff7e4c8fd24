//! Spatial keypoint distribution by recursive quad subdivision.

use std::cmp::Ordering;

use super::KeyPoint;

/// Axis-aligned region `[min_x, max_x) x [min_y, max_y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub min_x: f64,
    pub min_y: f64,
    pub max_x: f64,
    pub max_y: f64,
}

impl Rect {
    pub fn new(min_x: f64, min_y: f64, max_x: f64, max_y: f64) -> Self {
        Self {
            min_x,
            min_y,
            max_x,
            max_y,
        }
    }

    fn width(&self) -> f64 {
        self.max_x - self.min_x
    }

    fn height(&self) -> f64 {
        self.max_y - self.min_y
    }
}

#[derive(Debug)]
struct Node {
    rect: Rect,
    members: Vec<usize>,
    leaf: bool,
}

impl Node {
    fn new(rect: Rect, members: Vec<usize>, pts: &[KeyPoint]) -> Self {
        // No split can separate candidates sharing one position.
        let first = &pts[members[0]];
        let leaf = members.iter().all(|&m| pts[m].x == first.x && pts[m].y == first.y);
        Self { rect, members, leaf }
    }

    fn split(self, pts: &[KeyPoint]) -> Vec<Node> {
        let r = self.rect;
        let mx = 0.5 * (r.min_x + r.max_x);
        let my = 0.5 * (r.min_y + r.max_y);
        let quads = [
            Rect::new(r.min_x, r.min_y, mx, my),
            Rect::new(mx, r.min_y, r.max_x, my),
            Rect::new(r.min_x, my, mx, r.max_y),
            Rect::new(mx, my, r.max_x, r.max_y),
        ];
        let mut buckets: [Vec<usize>; 4] = Default::default();
        for &m in &self.members {
            let right = pts[m].x >= mx;
            let bottom = pts[m].y >= my;
            buckets[right as usize + 2 * bottom as usize].push(m);
        }
        quads
            .into_iter()
            .zip(buckets)
            .filter(|(_, b)| !b.is_empty())
            .map(|(q, b)| Node::new(q, b, pts))
            .collect()
    }
}

/// Higher response first; ties go to smaller `y`, then smaller `x`.
pub(crate) fn response_order(a: &KeyPoint, b: &KeyPoint) -> Ordering {
    b.response
        .partial_cmp(&a.response)
        .unwrap_or(Ordering::Equal)
        .then(a.y.partial_cmp(&b.y).unwrap_or(Ordering::Equal))
        .then(a.x.partial_cmp(&b.x).unwrap_or(Ordering::Equal))
}

/// Subdivides `bounds` until at least `target` nodes exist or every node
/// holds a single candidate position, then keeps the best-response candidate
/// of each node. The result is returned best first. It can exceed `target`
/// by the slack of the last split (at most 3), or when the initial column
/// split of a wide frame already yields more nodes than requested.
pub fn distribute_octtree(candidates: &[KeyPoint], target: usize, bounds: Rect) -> Vec<KeyPoint> {
    if candidates.is_empty() || target == 0 {
        return Vec::new();
    }
    let (w, h) = (bounds.width().max(1e-9), bounds.height().max(1e-9));
    let n_ini = ((w / h).round() as usize).max(1);
    let step = w / n_ini as f64;
    let mut initial: Vec<Vec<usize>> = vec![Vec::new(); n_ini];
    for (i, kp) in candidates.iter().enumerate() {
        let col = (((kp.x - bounds.min_x) / step).floor().max(0.0) as usize).min(n_ini - 1);
        initial[col].push(i);
    }
    let mut nodes: Vec<Node> = initial
        .into_iter()
        .enumerate()
        .filter(|(_, m)| !m.is_empty())
        .map(|(c, m)| {
            let x0 = bounds.min_x + step * c as f64;
            Node::new(Rect::new(x0, bounds.min_y, x0 + step, bounds.max_y), m, candidates)
        })
        .collect();

    // A split may leave every member in one quadrant, so a pass can end with
    // no new nodes; repeated halving still separates distinct positions.
    while nodes.len() < target {
        let before = nodes.len();
        let expandable = nodes.iter().filter(|n| !n.leaf).count();
        if expandable == 0 {
            break;
        }
        if before + 3 * expandable <= target {
            // Splitting everything cannot overshoot.
            let mut next = Vec::with_capacity(before + 3 * expandable);
            for node in nodes {
                if node.leaf {
                    next.push(node);
                } else {
                    next.extend(node.split(candidates));
                }
            }
            nodes = next;
        } else {
            // Split the most populated nodes first and stop at the target.
            let (mut open, mut done): (Vec<Node>, Vec<Node>) = nodes.into_iter().partition(|n| !n.leaf);
            open.sort_by_key(|n| std::cmp::Reverse(n.members.len()));
            let mut count = done.len() + open.len();
            let mut rest = Vec::new();
            for node in open {
                if count >= target {
                    rest.push(node);
                    continue;
                }
                let children = node.split(candidates);
                count = count - 1 + children.len();
                done.extend(children);
            }
            done.extend(rest);
            nodes = done;
        }
    }

    let mut kept: Vec<KeyPoint> = nodes
        .iter()
        .map(|n| {
            *n.members
                .iter()
                .map(|&m| &candidates[m])
                .min_by(|a, b| response_order(a, b))
                .expect("nonempty node")
        })
        .collect();
    kept.sort_by(response_order);
    kept
}
