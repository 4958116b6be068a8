use super::distance::DistanceMatrix;
use crate::{Error, Result};

/// Average-linkage (UPGMA) agglomeration tree.
///
/// Merge heights equal half the average distance between the merged
/// clusters, so heights are non-decreasing toward the root and the tree is
/// ultrametric.
#[derive(Debug, Clone)]
pub struct LinkageTree {
    nodes: Vec<Node>,
    root: usize,
}

#[derive(Debug, Clone)]
enum Node {
    Leaf { name: String },
    Internal { left: usize, right: usize, height: f64 },
}

impl LinkageTree {
    pub fn num_leaves(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Leaf { .. }))
            .count()
    }

    pub fn root_height(&self) -> f64 {
        self.height_of(self.root)
    }

    fn height_of(&self, index: usize) -> f64 {
        match &self.nodes[index] {
            Node::Leaf { .. } => 0.0,
            Node::Internal { height, .. } => *height,
        }
    }

    /// Merge heights in merge order (each parent at least as high as its
    /// children).
    pub fn merge_heights(&self) -> Vec<f64> {
        self.nodes
            .iter()
            .filter_map(|n| match n {
                Node::Internal { height, .. } => Some(*height),
                Node::Leaf { .. } => None,
            })
            .collect()
    }

    /// Newick serialization with branch lengths, terminated by `;`.
    pub fn to_newick(&self) -> String {
        let mut out = String::new();
        self.write_newick(self.root, self.height_of(self.root), &mut out);
        // The root carries no branch length.
        let trimmed = out.rfind(':').map(|i| &out[..i]).unwrap_or(&out);
        format!("{trimmed};")
    }

    fn write_newick(&self, index: usize, parent_height: f64, out: &mut String) {
        match &self.nodes[index] {
            Node::Leaf { name } => {
                out.push_str(name);
                out.push(':');
                out.push_str(&format_length(parent_height));
            }
            Node::Internal { left, right, height } => {
                out.push('(');
                self.write_newick(*left, *height, out);
                out.push(',');
                self.write_newick(*right, *height, out);
                out.push(')');
                out.push(':');
                out.push_str(&format_length(parent_height - height));
            }
        }
    }
}

/// Whole numbers print without a trailing `.0` so hand-written trees match
/// byte for byte.
fn format_length(x: f64) -> String {
    if x == x.trunc() && x.abs() < 9e15 {
        format!("{}", x as i64)
    } else {
        format!("{x}")
    }
}

/// Build the UPGMA tree for a distance matrix.
///
/// Cluster pairs are chosen by minimum average distance, ties broken toward
/// the pair containing the earliest leaves; children are ordered by their
/// earliest leaf, which makes the output deterministic.
pub fn upgma(d: &DistanceMatrix, leaf_names: &[String]) -> Result<LinkageTree> {
    let n = d.size();
    if n < 2 {
        return Err(Error::InvalidParameter("upgma needs at least two leaves".into()));
    }
    if leaf_names.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "{} names for {} leaves",
            leaf_names.len(),
            n
        )));
    }

    let mut nodes: Vec<Node> = leaf_names
        .iter()
        .map(|name| Node::Leaf { name: name.clone() })
        .collect();

    struct Cluster {
        node: usize,
        size: usize,
        min_leaf: usize,
    }
    let mut clusters: Vec<Cluster> = (0..n)
        .map(|i| Cluster {
            node: i,
            size: 1,
            min_leaf: i,
        })
        .collect();
    // Working distances between active clusters, indexed like `clusters`.
    let mut dist: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| d.get(i, j)).collect())
        .collect();

    while clusters.len() > 1 {
        // Pick the minimum-distance pair, ties toward the earliest leaves;
        // `lo` is the cluster holding the earlier leaf and becomes the left
        // child.
        let mut best: Option<(f64, usize, usize)> = None;
        for i in 0..clusters.len() {
            for j in i + 1..clusters.len() {
                let (lo, hi) = if clusters[i].min_leaf < clusters[j].min_leaf {
                    (i, j)
                } else {
                    (j, i)
                };
                let key = (dist[i][j], clusters[lo].min_leaf, clusters[hi].min_leaf);
                let better = match &best {
                    None => true,
                    Some((d0, l0, h0)) => {
                        key < (*d0, clusters[*l0].min_leaf, clusters[*h0].min_leaf)
                    }
                };
                if better {
                    best = Some((dist[i][j], lo, hi));
                }
            }
        }
        let (merge_dist, lo, hi) = best.unwrap();
        let height = merge_dist / 2.0;
        let node = nodes.len();
        nodes.push(Node::Internal {
            left: clusters[lo].node,
            right: clusters[hi].node,
            height,
        });

        // Average-linkage update, weighted by cluster sizes.
        let (a, b) = (lo.min(hi), lo.max(hi));
        let merged_size = clusters[a].size + clusters[b].size;
        let mut new_row = Vec::with_capacity(clusters.len() - 2);
        for i in 0..clusters.len() {
            if i == a || i == b {
                continue;
            }
            let w_a = clusters[a].size as f64;
            let w_b = clusters[b].size as f64;
            new_row.push((w_a * dist[a][i] + w_b * dist[b][i]) / (w_a + w_b));
        }
        let merged = Cluster {
            node,
            size: merged_size,
            min_leaf: clusters[a].min_leaf.min(clusters[b].min_leaf),
        };
        // Drop b then a (b > a), then append the merged cluster.
        clusters.remove(b);
        clusters.remove(a);
        dist.remove(b);
        dist.remove(a);
        for row in &mut dist {
            row.remove(b);
            row.remove(a);
        }
        for (row, &d_new) in dist.iter_mut().zip(&new_row) {
            row.push(d_new);
        }
        let mut last: Vec<f64> = new_row;
        last.push(0.0);
        dist.push(last);
        clusters.push(merged);
    }

    Ok(LinkageTree {
        root: clusters[0].node,
        nodes,
    })
}
