use serde::{Deserialize, Serialize};

use crate::structure::TableStructure;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "tag", rename_all = "lowercase")]
pub enum NodeLabel {
    Table,
    Tr,
    Td { colspan: usize, rowspan: usize, content: String },
}

impl NodeLabel {
    /// Cost of relabelling `self` as `other`.
    pub fn substitution_cost(&self, other: &NodeLabel) -> f64 {
        match (self, other) {
            (NodeLabel::Table, NodeLabel::Table) | (NodeLabel::Tr, NodeLabel::Tr) => 0.0,
            (
                NodeLabel::Td { colspan: c1, rowspan: r1, content: a },
                NodeLabel::Td { colspan: c2, rowspan: r2, content: b },
            ) => {
                if (c1, r1) != (c2, r2) {
                    1.0
                } else {
                    normalized_levenshtein(a, b)
                }
            }
            _ => 1.0,
        }
    }
}

/// Ordered labelled tree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableTree {
    pub label: NodeLabel,
    #[serde(default)]
    pub children: Vec<TableTree>,
}

impl TableTree {
    pub fn leaf(label: NodeLabel) -> Self {
        Self { label, children: Vec::new() }
    }

    pub fn size(&self) -> usize {
        1 + self.children.iter().map(TableTree::size).sum::<usize>()
    }
}

/// Character-level edit distance divided by the longer length; 0 for two
/// empty strings.
pub fn normalized_levenshtein(a: &str, b: &str) -> f64 {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let longest = a.len().max(b.len());
    if longest == 0 {
        return 0.0;
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            cur[j + 1] = (prev[j] + usize::from(ca != cb)).min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()] as f64 / longest as f64
}

/// Tag tree: `table` with one `tr` per row, each holding the cells anchored
/// in that row in column order.
pub fn to_tree(t: &TableStructure) -> TableTree {
    let mut rows: Vec<TableTree> = (0..t.n_rows).map(|_| TableTree::leaf(NodeLabel::Tr)).collect();
    let mut cells: Vec<_> = t.cells.iter().collect();
    cells.sort_by_key(|c| (c.row, c.col));
    for c in cells {
        if let Some(tr) = rows.get_mut(c.row) {
            tr.children.push(TableTree::leaf(NodeLabel::Td {
                colspan: c.col_span,
                rowspan: c.row_span,
                content: c.content.clone(),
            }));
        }
    }
    TableTree { label: NodeLabel::Table, children: rows }
}

struct Postorder<'a> {
    labels: Vec<&'a NodeLabel>,
    /// Leftmost leaf descendant of each node.
    leftmost: Vec<usize>,
    keyroots: Vec<usize>,
}

impl<'a> Postorder<'a> {
    fn new(root: &'a TableTree) -> Self {
        fn walk<'a>(t: &'a TableTree, labels: &mut Vec<&'a NodeLabel>, leftmost: &mut Vec<usize>) -> usize {
            let mut first = None;
            for c in &t.children {
                let l = walk(c, labels, leftmost);
                first.get_or_insert(l);
            }
            let l = first.unwrap_or(labels.len());
            labels.push(&t.label);
            leftmost.push(l);
            l
        }
        let mut labels = Vec::new();
        let mut leftmost = Vec::new();
        walk(root, &mut labels, &mut leftmost);
        let n = labels.len();
        let keyroots = (0..n).filter(|&i| !(i + 1..n).any(|j| leftmost[j] == leftmost[i])).collect();
        Self { labels, leftmost, keyroots }
    }
}

/// Ordered tree edit distance with unit insert/delete costs (Zhang–Shasha).
pub fn tree_edit_distance(a: &TableTree, b: &TableTree) -> f64 {
    let (a, b) = (Postorder::new(a), Postorder::new(b));
    let (n, m) = (a.labels.len(), b.labels.len());
    let mut td = vec![vec![0.0f64; m]; n];
    for &i in &a.keyroots {
        for &j in &b.keyroots {
            let (li, lj) = (a.leftmost[i], b.leftmost[j]);
            let (rows, cols) = (i - li + 2, j - lj + 2);
            let mut fd = vec![vec![0.0f64; cols]; rows];
            for di in 1..rows {
                fd[di][0] = fd[di - 1][0] + 1.0;
            }
            for dj in 1..cols {
                fd[0][dj] = fd[0][dj - 1] + 1.0;
            }
            for di in 1..rows {
                let x = li + di - 1;
                for dj in 1..cols {
                    let y = lj + dj - 1;
                    let edit = (fd[di - 1][dj] + 1.0).min(fd[di][dj - 1] + 1.0);
                    if a.leftmost[x] == li && b.leftmost[y] == lj {
                        let v = edit.min(fd[di - 1][dj - 1] + a.labels[x].substitution_cost(b.labels[y]));
                        fd[di][dj] = v;
                        td[x][y] = v;
                    } else {
                        fd[di][dj] = edit.min(fd[a.leftmost[x] - li][b.leftmost[y] - lj] + td[x][y]);
                    }
                }
            }
        }
    }
    td[n - 1][m - 1]
}

/// `1 − TED / max(tree sizes)`, clamped to `[0, 1]`.
pub fn teds(gt: &TableStructure, pred: &TableStructure) -> f64 {
    let (a, b) = (to_tree(gt), to_tree(pred));
    let denom = a.size().max(b.size()) as f64;
    (1.0 - tree_edit_distance(&a, &b) / denom).clamp(0.0, 1.0)
}
