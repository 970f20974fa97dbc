//! Block layouts for heat-map style plots: entity orderings grouped by
//! cluster, with group boundaries.

use serde::Serialize;

use blockmix::Partitions;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Group {
    /// Cluster label, or `[l_mu, l_sigma]` in the combined layout.
    pub key: Vec<usize>,
    pub start: usize,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxisLayout {
    pub order: Vec<usize>,
    pub groups: Vec<Group>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LayoutKind {
    Means,
    Variances,
    Combined,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Layout {
    pub kind: LayoutKind,
    pub rows: AxisLayout,
    pub columns: AxisLayout,
}

/// Stable sort of entity indices by key; empty keys produce no group.
fn axis_layout(keys: &[Vec<usize>]) -> AxisLayout {
    let mut order: Vec<usize> = (0..keys.len()).collect();
    order.sort_by(|&a, &b| keys[a].cmp(&keys[b]));
    let mut groups: Vec<Group> = Vec::new();
    for (pos, &i) in order.iter().enumerate() {
        match groups.last_mut() {
            Some(g) if g.key == keys[i] => g.size += 1,
            _ => groups.push(Group {
                key: keys[i].clone(),
                start: pos,
                size: 1,
            }),
        }
    }
    AxisLayout { order, groups }
}

fn single(labels: &[usize]) -> Vec<Vec<usize>> {
    labels.iter().map(|&l| vec![l]).collect()
}

pub fn layout(parts: &Partitions, kind: LayoutKind) -> Layout {
    let columns = match kind {
        LayoutKind::Means => single(&parts.w_mu),
        LayoutKind::Variances => single(&parts.w_sigma),
        LayoutKind::Combined => parts
            .w_mu
            .iter()
            .zip(&parts.w_sigma)
            .map(|(&a, &b)| vec![a, b])
            .collect(),
    };
    Layout {
        kind,
        rows: axis_layout(&single(&parts.z)),
        columns: axis_layout(&columns),
    }
}
