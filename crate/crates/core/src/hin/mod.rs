//! The entity-trigger co-occurrence network and its type-level adjacency matrices.
//!
//! Nodes are gold spans keyed by case-folded surface text plus type. An edge
//! joins an entity node and a trigger node, weighted by the number of
//! sentences in which both spans occur. The graph is bipartite by construction.

mod matrix;
mod metapath;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::Write;

use crate::corpus::{Corpus, Role};
use crate::error::{Error, Result};

pub use matrix::{direct_adjacency, metapath_adjacency, read_matrix_csv, MetaPathMatrix, TypeMatrix};
pub use metapath::{enumerate_metapaths, path_score, type_path_score, walk_prob, MetaPath};

/// The single link type of the network.
pub const RELATION: &str = "co-occurrence";

pub type NodeId = usize;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Node {
    pub role: Role,
    pub node_type: String,
    pub key: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Hin {
    nodes: Vec<Node>,
    index: HashMap<(String, String), NodeId>,
    // (entity node, trigger node) -> weight
    edges: BTreeMap<(NodeId, NodeId), u64>,
    // neighbours sorted by id
    adjacency: Vec<Vec<(NodeId, u64)>>,
}

impl Hin {
    /// Builds a network from explicit nodes and edges. Edge endpoints may be
    /// given in either order; repeated edges add their weights.
    pub fn from_parts(nodes: Vec<Node>, edges: &[(NodeId, NodeId, u64)]) -> Result<Self> {
        let mut index = HashMap::new();
        for (id, node) in nodes.iter().enumerate() {
            if index.insert((node.key.clone(), node.node_type.clone()), id).is_some() {
                return Err(Error::Graph(format!(
                    "duplicate node ({}, {})",
                    node.key, node.node_type
                )));
            }
        }
        let mut edge_map = BTreeMap::new();
        for &(a, b, w) in edges {
            if a >= nodes.len() || b >= nodes.len() {
                return Err(Error::Graph(format!("edge ({a}, {b}) references a missing node")));
            }
            if w == 0 {
                return Err(Error::Graph(format!("edge ({a}, {b}) has zero weight")));
            }
            let pair = match (nodes[a].role, nodes[b].role) {
                (Role::Entity, Role::Trigger) => (a, b),
                (Role::Trigger, Role::Entity) => (b, a),
                _ => {
                    return Err(Error::Graph(format!(
                        "edge ({a}, {b}) does not join an entity and a trigger"
                    )))
                }
            };
            *edge_map.entry(pair).or_insert(0) += w;
        }
        let mut adjacency = vec![Vec::new(); nodes.len()];
        for (&(e, t), &w) in &edge_map {
            adjacency[e].push((t, w));
            adjacency[t].push((e, w));
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Ok(Hin {
            nodes,
            index,
            edges: edge_map,
            adjacency,
        })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> Option<&Node> {
        self.nodes.get(id)
    }

    /// Looks up a node by key (case-folded here) and type name.
    pub fn node_id(&self, key: &str, node_type: &str) -> Option<NodeId> {
        self.index
            .get(&(key.to_lowercase(), node_type.to_string()))
            .copied()
    }

    /// φ: the type name of a node.
    pub fn type_of(&self, id: NodeId) -> Option<&str> {
        self.nodes.get(id).map(|n| n.node_type.as_str())
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Edges as `(entity node, trigger node, weight)`, sorted by node ids.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId, u64)> + '_ {
        self.edges.iter().map(|(&(e, t), &w)| (e, t, w))
    }

    pub fn weight(&self, a: NodeId, b: NodeId) -> u64 {
        let key = if a < self.nodes.len() && self.nodes[a].role == Role::Entity {
            (a, b)
        } else {
            (b, a)
        };
        self.edges.get(&key).copied().unwrap_or(0)
    }

    pub fn neighbors(&self, id: NodeId) -> &[(NodeId, u64)] {
        &self.adjacency[id]
    }

    /// A copy without the edge between `a` and `b`.
    pub fn without_edge(&self, a: NodeId, b: NodeId) -> Hin {
        let edges: Vec<_> = self
            .edges()
            .filter(|&(e, t, _)| !((e, t) == (a, b) || (e, t) == (b, a)))
            .collect();
        Hin::from_parts(self.nodes.clone(), &edges).expect("subgraph of a valid graph")
    }

    /// Edge list CSV: `entity_key,entity_type,trigger_key,trigger_type,weight`.
    pub fn write_edge_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let csv_err = |e: csv::Error| Error::Graph(format!("writing edge list: {e}"));
        w.write_record(["entity_key", "entity_type", "trigger_key", "trigger_type", "weight"])
            .map_err(csv_err)?;
        for (e, t, weight) in self.edges() {
            let (e, t) = (&self.nodes[e], &self.nodes[t]);
            w.write_record([
                e.key.as_str(),
                e.node_type.as_str(),
                t.key.as_str(),
                t.node_type.as_str(),
                &weight.to_string(),
            ])
            .map_err(csv_err)?;
        }
        w.flush().map_err(|e| Error::Graph(format!("writing edge list: {e}")))?;
        Ok(())
    }
}

/// Merges all gold spans of `corpus` into a co-occurrence network.
///
/// Within a sentence each distinct (entity, trigger) node pair counts once.
/// Node ids are assigned in (role, type, key) order, so the result does not
/// depend on sentence order.
pub fn build_hin(corpus: &Corpus) -> Hin {
    let schema = &corpus.schema;
    let mut pair_counts: BTreeMap<(Node, Node), u64> = BTreeMap::new();
    let mut all_nodes: BTreeSet<Node> = BTreeSet::new();

    for sentence in &corpus.sentences {
        let mut entities = BTreeSet::new();
        let mut triggers = BTreeSet::new();
        for span in sentence.spans(schema) {
            let node = Node {
                role: span.role,
                node_type: schema.types(span.role)[span.type_index].clone(),
                key: sentence.span_text(&span).to_lowercase(),
            };
            match span.role {
                Role::Entity => entities.insert(node),
                Role::Trigger => triggers.insert(node),
            };
        }
        for e in &entities {
            for t in &triggers {
                *pair_counts.entry((e.clone(), t.clone())).or_insert(0) += 1;
            }
        }
        all_nodes.extend(entities);
        all_nodes.extend(triggers);
    }

    let nodes: Vec<Node> = all_nodes.into_iter().collect();
    let ids: HashMap<&Node, NodeId> = nodes.iter().enumerate().map(|(i, n)| (n, i)).collect();
    let edges: Vec<_> = pair_counts
        .iter()
        .map(|((e, t), &w)| (ids[e], ids[t], w))
        .collect();
    Hin::from_parts(nodes.clone(), &edges).expect("co-occurrence edges are bipartite")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{parse_corpus, TagSchema};

    fn schema() -> TagSchema {
        TagSchema::new(["PER", "GPE"], ["Movement"]).unwrap()
    }

    const TROOPS: &str = "U.S.\tB-ENT:PER\ntroops\tI-ENT:PER\ngo\tB-TRG:Movement\nto\tO\nIraq\tB-ENT:GPE\n\n";

    #[test]
    fn troops_go_iraq() {
        let hin = build_hin(&parse_corpus(TROOPS.as_bytes(), &schema()).unwrap());
        assert_eq!(hin.nodes().len(), 3);
        assert_eq!(hin.num_edges(), 2);
        let go = hin.node_id("go", "Movement").unwrap();
        let troops = hin.node_id("U.S. troops", "PER").unwrap();
        let iraq = hin.node_id("iraq", "GPE").unwrap();
        assert_eq!(hin.weight(troops, go), 1);
        assert_eq!(hin.weight(go, iraq), 1);
        assert_eq!(hin.weight(troops, iraq), 0);
    }

    #[test]
    fn repeated_sentence_doubles_weight() {
        let text = format!("{TROOPS}{TROOPS}");
        let hin = build_hin(&parse_corpus(text.as_bytes(), &schema()).unwrap());
        assert_eq!(hin.num_edges(), 2);
        assert!(hin.edges().all(|(_, _, w)| w == 2));
    }

    #[test]
    fn case_folded_keys_merge() {
        let text = "Iraq\tB-ENT:GPE\ngo\tB-TRG:Movement\n\niraq\tB-ENT:GPE\nGo\tB-TRG:Movement\n\n";
        let hin = build_hin(&parse_corpus(text.as_bytes(), &schema()).unwrap());
        assert_eq!(hin.nodes().len(), 2);
        assert_eq!(hin.edges().collect::<Vec<_>>(), vec![(0, 1, 2)]);
    }

    #[test]
    fn repeated_span_in_one_sentence_counts_once() {
        let text = "Iraq\tB-ENT:GPE\ngo\tB-TRG:Movement\nIraq\tB-ENT:GPE\n\n";
        let hin = build_hin(&parse_corpus(text.as_bytes(), &schema()).unwrap());
        assert_eq!(hin.edges().map(|(_, _, w)| w).collect::<Vec<_>>(), vec![1]);
    }

    #[test]
    fn entities_without_triggers() {
        let text = "Iraq\tB-ENT:GPE\nBob\tB-ENT:PER\n\n";
        let hin = build_hin(&parse_corpus(text.as_bytes(), &schema()).unwrap());
        assert_eq!(hin.nodes().len(), 2);
        assert_eq!(hin.num_edges(), 0);
    }

    #[test]
    fn rejects_non_bipartite_edges() {
        let nodes = vec![
            Node { role: Role::Entity, node_type: "PER".into(), key: "a".into() },
            Node { role: Role::Entity, node_type: "GPE".into(), key: "b".into() },
        ];
        assert!(Hin::from_parts(nodes.clone(), &[(0, 1, 1)]).is_err());
        assert!(Hin::from_parts(nodes, &[(0, 5, 1)]).is_err());
    }

    #[test]
    fn edge_csv_quotes_commas() {
        let text = "Smith\tB-ENT:PER\n,\tI-ENT:PER\nJr\tI-ENT:PER\nwent\tB-TRG:Movement\n\n";
        let hin = build_hin(&parse_corpus(text.as_bytes(), &schema()).unwrap());
        let mut out = Vec::new();
        hin.write_edge_csv(&mut out).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "entity_key,entity_type,trigger_key,trigger_type,weight\n\"smith , jr\",PER,went,Movement,1\n"
        );
    }
}
