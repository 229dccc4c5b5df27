use std::collections::BTreeMap;
use std::fmt;

use super::{Hin, NodeId};
use crate::corpus::{Role, TagSchema};
use crate::error::{Error, Result};

/// A sequence of node types `ρ_1 … ρ_{l+1}` with alternating roles.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MetaPath {
    types: Vec<String>,
}

impl MetaPath {
    /// Checks every type against `schema` and that roles alternate.
    pub fn new<I, S>(schema: &TagSchema, types: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let types: Vec<String> = types.into_iter().map(Into::into).collect();
        if types.len() < 2 {
            return Err(Error::MetaPath("a meta-path needs at least one edge".into()));
        }
        let mut prev: Option<Role> = None;
        for name in &types {
            let (role, _) = schema
                .role_of(name)
                .ok_or_else(|| Error::MetaPath(format!("type {name:?} is not in the schema")))?;
            if prev == Some(role) {
                return Err(Error::MetaPath(format!(
                    "{} breaks entity/trigger alternation at {name}",
                    types.join("-")
                )));
            }
            prev = Some(role);
        }
        Ok(MetaPath { types })
    }

    pub fn types(&self) -> &[String] {
        &self.types
    }

    /// Number of edges, `l`.
    pub fn len(&self) -> usize {
        self.types.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn first(&self) -> &str {
        &self.types[0]
    }

    pub fn last(&self) -> &str {
        &self.types[self.types.len() - 1]
    }

    pub fn reversed(&self) -> MetaPath {
        MetaPath {
            types: self.types.iter().rev().cloned().collect(),
        }
    }
}

impl fmt::Display for MetaPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.types.join("-"))
    }
}

fn typed_neighbors<'a>(hin: &'a Hin, node: NodeId, next_type: &'a str) -> impl Iterator<Item = (NodeId, u64)> + 'a {
    hin.neighbors(node)
        .iter()
        .copied()
        .filter(move |&(m, _)| hin.nodes[m].node_type == next_type)
}

/// One step of the typed random walk: uniform over the neighbours of `node`
/// whose type is `next_type`. Empty when there are none.
pub fn walk_prob(hin: &Hin, node: NodeId, next_type: &str) -> Result<BTreeMap<NodeId, f64>> {
    if node >= hin.nodes.len() {
        return Err(Error::Graph(format!("unknown node {node}")));
    }
    let targets: Vec<NodeId> = typed_neighbors(hin, node, next_type).map(|(m, _)| m).collect();
    let p = 1.0 / targets.len() as f64;
    Ok(targets.into_iter().map(|m| (m, p)).collect())
}

// Pushes `mass` one step along the typed walk, multiplying in edge weights.
fn propagate(hin: &Hin, mass: &BTreeMap<NodeId, f64>, next_type: &str) -> BTreeMap<NodeId, f64> {
    let mut next = BTreeMap::new();
    for (&n, &m) in mass {
        let neighbors: Vec<_> = typed_neighbors(hin, n, next_type).collect();
        if neighbors.is_empty() {
            continue;
        }
        let step = 1.0 / neighbors.len() as f64;
        for (target, w) in neighbors {
            *next.entry(target).or_insert(0.0) += m * w as f64 * step;
        }
    }
    next
}

fn walk(hin: &Hin, rho: &MetaPath, start: BTreeMap<NodeId, f64>) -> BTreeMap<NodeId, f64> {
    rho.types[1..]
        .iter()
        .fold(start, |mass, next_type| propagate(hin, &mass, next_type))
}

/// Reachability score of `v` from `u` along `rho`: the sum over every node
/// walk `u = n_1, …, n_{l+1} = v` matching the types of `rho` of
/// `Π w(n_i, n_{i+1}) · P(n_{i+1} | n_i)`. Weights multiply in, so the score
/// can exceed 1.
pub fn path_score(hin: &Hin, rho: &MetaPath, u: NodeId, v: NodeId) -> Result<f64> {
    let (tu, tv) = match (hin.type_of(u), hin.type_of(v)) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::Graph(format!("unknown node {u} or {v}"))),
    };
    if tu != rho.first() || tv != rho.last() {
        return Err(Error::MetaPath(format!(
            "endpoints typed {tu}..{tv} do not match {rho}"
        )));
    }
    let end = walk(hin, rho, BTreeMap::from([(u, 1.0)]));
    Ok(end.get(&v).copied().unwrap_or(0.0))
}

/// Sum of [`path_score`] over every node pair typed `(ρ_1, ρ_{l+1})`.
pub fn type_path_score(hin: &Hin, rho: &MetaPath) -> f64 {
    let start: BTreeMap<NodeId, f64> = hin
        .nodes
        .iter()
        .enumerate()
        .filter(|(_, n)| n.node_type == rho.first())
        .map(|(i, _)| (i, 1.0))
        .collect();
    walk(hin, rho, start).values().sum()
}

/// Every entity-to-trigger meta-path of length `l` realized by at least one
/// node walk in `hin`, in lexicographic order of type indices.
pub fn enumerate_metapaths(hin: &Hin, schema: &TagSchema, length: usize) -> Result<Vec<MetaPath>> {
    if length == 0 || length.is_multiple_of(2) {
        return Err(Error::MetaPath(format!(
            "length must be odd so paths run entity to trigger, got {length}"
        )));
    }
    // node ids grouped by (role, type index)
    let mut by_type: BTreeMap<(Role, usize), Vec<NodeId>> = BTreeMap::new();
    for (id, node) in hin.nodes.iter().enumerate() {
        let (role, t) = schema
            .role_of(&node.node_type)
            .filter(|(r, _)| *r == node.role)
            .ok_or_else(|| Error::Graph(format!("node type {} is not in the schema", node.node_type)))?;
        by_type.entry((role, t)).or_default().push(id);
    }

    let mut out = Vec::new();
    let mut prefix: Vec<usize> = Vec::with_capacity(length + 1);
    for e in 0..schema.entity_types().len() {
        let Some(frontier) = by_type.get(&(Role::Entity, e)) else {
            continue;
        };
        prefix.push(e);
        extend(hin, schema, length, frontier, &mut prefix, &mut out);
        prefix.pop();
    }
    Ok(out)
}

fn extend(
    hin: &Hin,
    schema: &TagSchema,
    length: usize,
    frontier: &[NodeId],
    prefix: &mut Vec<usize>,
    out: &mut Vec<MetaPath>,
) {
    let step = prefix.len();
    if step == length + 1 {
        let types = prefix.iter().enumerate().map(|(i, &t)| {
            let role = if i % 2 == 0 { Role::Entity } else { Role::Trigger };
            schema.types(role)[t].clone()
        });
        out.push(MetaPath { types: types.collect() });
        return;
    }
    let role = if step.is_multiple_of(2) { Role::Entity } else { Role::Trigger };
    for (t, name) in schema.types(role).iter().enumerate() {
        let mut next: Vec<NodeId> = frontier
            .iter()
            .flat_map(|&n| typed_neighbors(hin, n, name).map(|(m, _)| m))
            .collect();
        if next.is_empty() {
            continue;
        }
        next.sort_unstable();
        next.dedup();
        prefix.push(t);
        extend(hin, schema, length, &next, prefix, out);
        prefix.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hin::Node;

    fn schema() -> TagSchema {
        TagSchema::new(["PER", "GPE", "WEA"], ["Movement", "Conflict"]).unwrap()
    }

    fn node(role: Role, ty: &str, key: &str) -> Node {
        Node { role, node_type: ty.into(), key: key.into() }
    }

    // e1(PER) -2- t1(Movement) -1- e2(GPE)
    fn chain() -> Hin {
        Hin::from_parts(
            vec![
                node(Role::Entity, "PER", "e1"),
                node(Role::Trigger, "Movement", "t1"),
                node(Role::Entity, "GPE", "e2"),
            ],
            &[(0, 1, 2), (1, 2, 1)],
        )
        .unwrap()
    }

    #[test]
    fn metapath_validation() {
        let s = schema();
        assert!(MetaPath::new(&s, ["PER", "Movement", "GPE"]).is_ok());
        assert!(MetaPath::new(&s, ["PER", "GPE"]).is_err());
        assert!(MetaPath::new(&s, ["PER"]).is_err());
        assert!(MetaPath::new(&s, ["PER", "Travel"]).is_err());
        let p = MetaPath::new(&s, ["WEA", "Conflict", "GPE", "Movement"]).unwrap();
        assert_eq!(p.len(), 3);
        assert_eq!(p.reversed().to_string(), "Movement-GPE-Conflict-WEA");
    }

    #[test]
    fn walk_prob_cases() {
        let hin = Hin::from_parts(
            vec![
                node(Role::Trigger, "Movement", "go"),
                node(Role::Entity, "GPE", "iraq"),
                node(Role::Entity, "GPE", "the country"),
                node(Role::Entity, "PER", "u.s. troops"),
            ],
            &[(0, 1, 1), (0, 2, 1), (0, 3, 1)],
        )
        .unwrap();
        let p = walk_prob(&hin, 0, "GPE").unwrap();
        assert_eq!(p, BTreeMap::from([(1, 0.5), (2, 0.5)]));
        assert_eq!(walk_prob(&hin, 0, "PER").unwrap(), BTreeMap::from([(3, 1.0)]));
        assert!(walk_prob(&hin, 0, "WEA").unwrap().is_empty());
        assert!(walk_prob(&hin, 9, "GPE").is_err());
    }

    #[test]
    fn chain_score() {
        let s = schema();
        let hin = chain();
        let rho = MetaPath::new(&s, ["PER", "Movement", "GPE"]).unwrap();
        assert_eq!(path_score(&hin, &rho, 0, 2).unwrap(), 2.0);
        assert!(path_score(&hin, &rho, 2, 0).is_err());
        let rho2 = MetaPath::new(&s, ["PER", "Conflict", "GPE"]).unwrap();
        assert_eq!(path_score(&hin, &rho2, 0, 2).unwrap(), 0.0);
    }

    #[test]
    fn length_one_score_is_weight_over_degree() {
        let s = schema();
        let hin = Hin::from_parts(
            vec![
                node(Role::Entity, "PER", "e"),
                node(Role::Trigger, "Movement", "t1"),
                node(Role::Trigger, "Movement", "t2"),
                node(Role::Trigger, "Movement", "t3"),
                node(Role::Trigger, "Conflict", "c"),
            ],
            &[(0, 1, 5), (0, 2, 1), (0, 3, 2), (0, 4, 7)],
        )
        .unwrap();
        let rho = MetaPath::new(&s, ["PER", "Movement"]).unwrap();
        assert!((path_score(&hin, &rho, 0, 1).unwrap() - 5.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn enumerate_single_edge() {
        let s = schema();
        let hin = Hin::from_parts(
            vec![node(Role::Entity, "PER", "a"), node(Role::Trigger, "Movement", "b")],
            &[(0, 1, 1)],
        )
        .unwrap();
        let paths = enumerate_metapaths(&hin, &s, 1).unwrap();
        assert_eq!(paths, vec![MetaPath::new(&s, ["PER", "Movement"]).unwrap()]);
        assert!(enumerate_metapaths(&hin, &s, 2).is_err());
        assert!(enumerate_metapaths(&hin, &s, 0).is_err());
        // a walk may revisit nodes
        assert_eq!(enumerate_metapaths(&hin, &s, 3).unwrap().len(), 1);
    }

    #[test]
    fn enumerate_empty() {
        let s = schema();
        let hin = Hin::from_parts(vec![node(Role::Entity, "PER", "a")], &[]).unwrap();
        for l in [1, 3, 5] {
            assert!(enumerate_metapaths(&hin, &s, l).unwrap().is_empty());
        }
    }

    #[test]
    fn enumeration_is_lexicographic() {
        let s = schema();
        let hin = Hin::from_parts(
            vec![
                node(Role::Entity, "WEA", "gun"),
                node(Role::Entity, "PER", "bob"),
                node(Role::Trigger, "Conflict", "fight"),
                node(Role::Trigger, "Movement", "go"),
            ],
            &[(0, 2, 1), (1, 2, 1), (1, 3, 1)],
        )
        .unwrap();
        let names: Vec<String> = enumerate_metapaths(&hin, &s, 1)
            .unwrap()
            .iter()
            .map(ToString::to_string)
            .collect();
        assert_eq!(names, ["PER-Movement", "PER-Conflict", "WEA-Conflict"]);
    }
}
