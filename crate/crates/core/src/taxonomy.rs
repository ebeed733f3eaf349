//! Hierarchical label taxonomies.
//!
//! A [`Taxonomy`] is an ordered forest of named nodes. Nodes are addressed by
//! [`NodePath`]s (`/Hate/Target_of_hate/Religion_or_belief/Jews`) and by a
//! dense index assigned in depth-first pre-order over the root list. That
//! index is the coordinate system of every [`LabelVector`](crate::LabelVector)
//! and of the classifier's weight rows, so any edit produces a fresh index.
//!
//! Taxonomies are immutable; [`Taxonomy::apply_directives`] returns a new
//! value.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// A node address: the sequence of names from a level-0 node down.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodePath(Vec<String>);

impl NodePath {
    pub fn new<S: Into<String>>(segments: impl IntoIterator<Item = S>) -> Self {
        NodePath(segments.into_iter().map(Into::into).collect())
    }

    pub fn root(name: &str) -> Self {
        NodePath(vec![name.to_string()])
    }

    pub fn segments(&self) -> &[String] {
        &self.0
    }

    /// Last segment.
    pub fn name(&self) -> &str {
        self.0.last().map(String::as_str).unwrap_or("")
    }

    /// Number of edges from the level-0 node; level-0 nodes have depth 0.
    pub fn depth(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    pub fn parent(&self) -> Option<NodePath> {
        (self.0.len() > 1).then(|| NodePath(self.0[..self.0.len() - 1].to_vec()))
    }

    pub fn child(&self, name: &str) -> NodePath {
        let mut segs = self.0.clone();
        segs.push(name.to_string());
        NodePath(segs)
    }

    pub fn starts_with(&self, prefix: &NodePath) -> bool {
        self.0.starts_with(&prefix.0)
    }
}

impl fmt::Display for NodePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for seg in &self.0 {
            write!(f, "/{seg}")?;
        }
        Ok(())
    }
}

impl FromStr for NodePath {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let rest = s
            .strip_prefix('/')
            .ok_or_else(|| Error::UnknownPath(s.to_string()))?;
        let segs: Vec<String> = rest.split('/').map(str::to_string).collect();
        if segs.iter().any(String::is_empty) {
            return Err(Error::UnknownPath(s.to_string()));
        }
        Ok(NodePath(segs))
    }
}

/// Tree form of a taxonomy node, convenient for building taxonomies by hand.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TaxonomyNode {
    pub name: String,
    pub children: Vec<TaxonomyNode>,
}

impl TaxonomyNode {
    pub fn leaf(name: &str) -> Self {
        TaxonomyNode { name: name.to_string(), children: Vec::new() }
    }

    pub fn with_children(name: &str, children: Vec<TaxonomyNode>) -> Self {
        TaxonomyNode { name: name.to_string(), children }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Node {
    name: String,
    parent: Option<usize>,
    children: Vec<usize>,
    depth: usize,
    /// One past the last pre-order index of this node's subtree.
    subtree_end: usize,
}

/// SHA-256 of the canonical serialization.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Fingerprint(pub [u8; 32]);

impl Fingerprint {
    pub fn to_hex(&self) -> String {
        self.0.iter().map(|b| format!("{b:02x}")).collect()
    }
}

impl fmt::Display for Fingerprint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

/// Class and leaf counts. Level-0 nodes never count as classes; childless
/// nodes are leaves at any level.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub struct Census {
    pub classes: usize,
    pub leaves: usize,
}

#[derive(Clone, Debug)]
pub struct Taxonomy {
    nodes: Vec<Node>,
    roots: Vec<usize>,
    by_path: HashMap<NodePath, usize>,
}

impl PartialEq for Taxonomy {
    fn eq(&self, other: &Self) -> bool {
        self.nodes == other.nodes && self.roots == other.roots
    }
}

impl Eq for Taxonomy {}

pub(crate) fn valid_name_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '+' || c == '-'
}

fn check_name(name: &str, line: usize) -> Result<()> {
    if name.is_empty() {
        return Err(Error::EmptyName { line });
    }
    if !name.chars().all(valid_name_char) {
        return Err(Error::BadChar { line, name: name.to_string() });
    }
    Ok(())
}

impl Taxonomy {
    /// Builds and validates a taxonomy from its level-0 nodes.
    pub fn from_roots(roots: Vec<TaxonomyNode>) -> Result<Self> {
        let mut nodes = Vec::new();
        let mut root_ids = Vec::new();
        let mut by_path = HashMap::new();
        check_siblings(&roots, &NodePath(Vec::new()))?;
        for root in &roots {
            let id = flatten(root, None, 0, &NodePath(Vec::new()), &mut nodes, &mut by_path)?;
            root_ids.push(id);
        }
        Ok(Taxonomy { nodes, roots: root_ids, by_path })
    }

    /// Parses the indented text format: one node per line, two spaces per
    /// depth level, `#` comment lines.
    pub fn parse(text: &str) -> Result<Self> {
        // (depth, name, line) in document order
        let mut entries: Vec<(usize, &str, usize)> = Vec::new();
        let mut prev_depth: Option<usize> = None;
        for (i, raw) in text.split('\n').enumerate() {
            let line_no = i + 1;
            let line = raw.strip_suffix('\r').unwrap_or(raw);
            if line.trim().is_empty() || line.trim_start_matches(' ').starts_with('#') {
                continue;
            }
            let spaces = line.len() - line.trim_start_matches(' ').len();
            if spaces % 2 != 0 {
                return Err(Error::OddIndent { line: line_no, spaces });
            }
            let depth = spaces / 2;
            let allowed = prev_depth.map_or(0, |d| d + 1);
            if depth > allowed {
                return Err(Error::Indent { line: line_no, from: prev_depth.unwrap_or(0), to: depth });
            }
            let name = &line[spaces..];
            check_name(name, line_no)?;
            entries.push((depth, name, line_no));
            prev_depth = Some(depth);
        }

        // Rebuild the tree with an explicit stack of open ancestors.
        let mut roots: Vec<TaxonomyNode> = Vec::new();
        let mut stack: Vec<TaxonomyNode> = Vec::new();
        for (depth, name, _) in entries {
            while stack.len() > depth {
                let done = stack.pop().expect("non-empty stack");
                attach(&mut stack, &mut roots, done);
            }
            stack.push(TaxonomyNode::leaf(name));
        }
        while let Some(done) = stack.pop() {
            attach(&mut stack, &mut roots, done);
        }
        Taxonomy::from_roots(roots)
    }

    /// Canonical form: pre-order, two spaces per level, LF after every line.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        for node in &self.nodes {
            for _ in 0..node.depth {
                out.push_str("  ");
            }
            out.push_str(&node.name);
            out.push('\n');
        }
        out
    }

    pub fn to_roots(&self) -> Vec<TaxonomyNode> {
        fn build(t: &Taxonomy, i: usize) -> TaxonomyNode {
            TaxonomyNode {
                name: t.nodes[i].name.clone(),
                children: t.nodes[i].children.iter().map(|&c| build(t, c)).collect(),
            }
        }
        self.roots.iter().map(|&r| build(self, r)).collect()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn roots(&self) -> &[usize] {
        &self.roots
    }

    pub fn name(&self, i: usize) -> &str {
        &self.nodes[i].name
    }

    pub fn parent(&self, i: usize) -> Option<usize> {
        self.nodes[i].parent
    }

    pub fn children(&self, i: usize) -> &[usize] {
        &self.nodes[i].children
    }

    pub fn depth(&self, i: usize) -> usize {
        self.nodes[i].depth
    }

    pub fn is_leaf(&self, i: usize) -> bool {
        self.nodes[i].children.is_empty()
    }

    /// Pre-order indices of the subtree rooted at `i`, `i` included.
    pub fn subtree(&self, i: usize) -> std::ops::Range<usize> {
        i..self.nodes[i].subtree_end
    }

    pub fn is_ancestor(&self, anc: usize, of: usize) -> bool {
        anc != of && self.subtree(anc).contains(&of)
    }

    pub fn index_of(&self, path: &NodePath) -> Result<usize> {
        self.by_path
            .get(path)
            .copied()
            .ok_or_else(|| Error::UnknownPath(path.to_string()))
    }

    /// Parses `path` and looks it up.
    pub fn index_of_str(&self, path: &str) -> Result<usize> {
        self.index_of(&path.parse()?)
    }

    pub fn contains(&self, path: &NodePath) -> bool {
        self.by_path.contains_key(path)
    }

    pub fn path(&self, i: usize) -> NodePath {
        let mut segs = Vec::with_capacity(self.nodes[i].depth + 1);
        let mut cur = Some(i);
        while let Some(c) = cur {
            segs.push(self.nodes[c].name.clone());
            cur = self.nodes[c].parent;
        }
        segs.reverse();
        NodePath(segs)
    }

    /// All paths in index order.
    pub fn paths(&self) -> Vec<NodePath> {
        (0..self.len()).map(|i| self.path(i)).collect()
    }

    /// Indices of the strict ancestors of `i`, nearest first.
    pub fn ancestor_indices(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        std::iter::successors(self.nodes[i].parent, move |&p| self.nodes[p].parent)
    }

    /// Strict ancestors of `path`, root first.
    pub fn ancestors(&self, path: &NodePath) -> Result<Vec<NodePath>> {
        let i = self.index_of(path)?;
        let mut out: Vec<NodePath> = self.ancestor_indices(i).map(|a| self.path(a)).collect();
        out.reverse();
        Ok(out)
    }

    pub fn census(&self) -> Census {
        let leaves = self.nodes.iter().filter(|n| n.children.is_empty()).count();
        let classes = self
            .nodes
            .iter()
            .filter(|n| n.depth > 0 && !n.children.is_empty())
            .count();
        Census { classes, leaves }
    }

    pub fn fingerprint(&self) -> Fingerprint {
        Fingerprint(Sha256::digest(self.serialize().as_bytes()).into())
    }

    /// Applies edits in order and returns the edited taxonomy.
    pub fn apply_directives(&self, directives: &[EditDirective]) -> Result<Taxonomy> {
        self.apply_directives_traced(directives).map(|(t, _)| t)
    }

    /// Like [`apply_directives`](Self::apply_directives), also returning where
    /// every node of `self` ended up.
    pub fn apply_directives_traced(
        &self,
        directives: &[EditDirective],
    ) -> Result<(Taxonomy, PathTranslation)> {
        let mut draft = Draft::from(self);
        for d in directives {
            draft.apply(d)?;
        }
        let (roots, order) = draft.build();
        let edited = Taxonomy::from_roots(roots)?;
        let mut new_of_old = vec![None; self.len()];
        for (new_idx, &draft_id) in order.iter().enumerate() {
            if draft_id < self.len() {
                new_of_old[draft_id] = Some(new_idx);
            }
        }
        let map = (0..self.len())
            .map(|i| (self.path(i), new_of_old[i].map(|n| edited.path(n))))
            .collect();
        Ok((edited, PathTranslation { map }))
    }

    /// Level-0 node named `name`, if present.
    pub fn root_named(&self, name: &str) -> Option<usize> {
        self.roots.iter().copied().find(|&r| self.nodes[r].name == name)
    }
}

fn attach(stack: &mut [TaxonomyNode], roots: &mut Vec<TaxonomyNode>, node: TaxonomyNode) {
    match stack.last_mut() {
        Some(parent) => parent.children.push(node),
        None => roots.push(node),
    }
}

fn check_siblings(siblings: &[TaxonomyNode], parent: &NodePath) -> Result<()> {
    let mut seen = HashSet::new();
    for s in siblings {
        if !seen.insert(s.name.as_str()) {
            return Err(Error::DuplicateSibling { parent: parent.to_string(), name: s.name.clone() });
        }
    }
    Ok(())
}

fn flatten(
    node: &TaxonomyNode,
    parent: Option<usize>,
    depth: usize,
    parent_path: &NodePath,
    nodes: &mut Vec<Node>,
    by_path: &mut HashMap<NodePath, usize>,
) -> Result<usize> {
    check_name(&node.name, 0)?;
    let path = parent_path.child(&node.name);
    check_siblings(&node.children, &path)?;
    let id = nodes.len();
    nodes.push(Node {
        name: node.name.clone(),
        parent,
        children: Vec::with_capacity(node.children.len()),
        depth,
        subtree_end: id + 1,
    });
    for child in &node.children {
        let cid = flatten(child, Some(id), depth + 1, &path, nodes, by_path)?;
        nodes[id].children.push(cid);
    }
    nodes[id].subtree_end = nodes.len();
    by_path.insert(path, id);
    Ok(id)
}

/// Parses a taxonomy document.
pub fn parse_taxonomy(text: &str) -> Result<Taxonomy> {
    Taxonomy::parse(text)
}

/// Emits the canonical document for `t`.
pub fn serialize_taxonomy(t: &Taxonomy) -> String {
    t.serialize()
}

/// A single human-authored taxonomy edit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EditDirective {
    /// Append a new leaf `name` under `parent`.
    AddNode { parent: NodePath, name: String },
    /// Move `subject` (with its subtree) to the end of `new_parent`'s children.
    Reparent { subject: NodePath, new_parent: NodePath },
    RemoveSubtree { subject: NodePath },
}

impl fmt::Display for EditDirective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EditDirective::AddNode { parent, name } => write!(f, "ADD_NODE {parent} {name}"),
            EditDirective::Reparent { subject, new_parent } => {
                write!(f, "REPARENT {subject} {new_parent}")
            }
            EditDirective::RemoveSubtree { subject } => write!(f, "REMOVE_SUBTREE {subject}"),
        }
    }
}

/// Parses a directives document: one directive per line, whitespace
/// separated, `#` comments.
///
/// ```text
/// ADD_NODE <parent-path> <name>
/// REPARENT <subject-path> <new-parent-path>
/// REMOVE_SUBTREE <subject-path>
/// ```
pub fn parse_directives(text: &str) -> Result<Vec<EditDirective>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let bad = |msg: &str| Error::Directive { line: line_no, msg: msg.to_string() };
        let path = |s: &str| {
            s.parse::<NodePath>()
                .map_err(|_| bad(&format!("{s:?} is not a path")))
        };
        let d = match fields.as_slice() {
            ["ADD_NODE", parent, name] => {
                check_name(name, line_no)?;
                EditDirective::AddNode { parent: path(parent)?, name: name.to_string() }
            }
            ["REPARENT", subject, target] => {
                EditDirective::Reparent { subject: path(subject)?, new_parent: path(target)? }
            }
            ["REMOVE_SUBTREE", subject] => EditDirective::RemoveSubtree { subject: path(subject)? },
            _ => return Err(bad("expected ADD_NODE, REPARENT or REMOVE_SUBTREE with its paths")),
        };
        out.push(d);
    }
    Ok(out)
}

/// Where each node of a taxonomy went after a round of edits.
#[derive(Clone, Debug, Default)]
pub struct PathTranslation {
    map: HashMap<NodePath, Option<NodePath>>,
}

impl PathTranslation {
    /// New path of `old`; `None` if it was removed or never existed.
    pub fn translate(&self, old: &NodePath) -> Option<&NodePath> {
        self.map.get(old).and_then(Option::as_ref)
    }

    pub fn was_removed(&self, old: &NodePath) -> bool {
        matches!(self.map.get(old), Some(None))
    }
}

/// Mutable working copy used while applying directives. Ids of the original
/// nodes equal their pre-order index; added nodes get fresh ids.
struct Draft {
    names: Vec<String>,
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    roots: Vec<usize>,
}

impl From<&Taxonomy> for Draft {
    fn from(t: &Taxonomy) -> Self {
        Draft {
            names: t.nodes.iter().map(|n| n.name.clone()).collect(),
            parent: t.nodes.iter().map(|n| n.parent).collect(),
            children: t.nodes.iter().map(|n| n.children.clone()).collect(),
            roots: t.roots.clone(),
        }
    }
}

impl Draft {
    fn find(&self, path: &NodePath) -> Result<usize> {
        let mut level = &self.roots;
        let mut found = None;
        for seg in path.segments() {
            let id = level
                .iter()
                .copied()
                .find(|&c| &self.names[c] == seg)
                .ok_or_else(|| Error::UnknownPath(path.to_string()))?;
            found = Some(id);
            level = &self.children[id];
        }
        found.ok_or_else(|| Error::UnknownPath(path.to_string()))
    }

    fn has_child(&self, parent: usize, name: &str) -> bool {
        self.children[parent].iter().any(|&c| self.names[c] == name)
    }

    fn detach(&mut self, id: usize) {
        match self.parent[id] {
            Some(p) => self.children[p].retain(|&c| c != id),
            None => self.roots.retain(|&r| r != id),
        }
    }

    fn apply(&mut self, d: &EditDirective) -> Result<()> {
        match d {
            EditDirective::AddNode { parent, name } => {
                let p = self.find(parent)?;
                if self.has_child(p, name) {
                    return Err(Error::DuplicateSibling { parent: parent.to_string(), name: name.clone() });
                }
                let id = self.names.len();
                self.names.push(name.clone());
                self.parent.push(Some(p));
                self.children.push(Vec::new());
                self.children[p].push(id);
            }
            EditDirective::Reparent { subject, new_parent } => {
                let s = self.find(subject)?;
                let p = self.find(new_parent)?;
                if self.parent[s].is_none() {
                    return Err(Error::RootEdit(subject.to_string()));
                }
                let mut cur = Some(p);
                while let Some(c) = cur {
                    if c == s {
                        return Err(Error::CycleCreated {
                            subject: subject.to_string(),
                            target: new_parent.to_string(),
                        });
                    }
                    cur = self.parent[c];
                }
                if self.parent[s] == Some(p) {
                    return Ok(());
                }
                if self.has_child(p, &self.names[s]) {
                    return Err(Error::DuplicateSibling {
                        parent: new_parent.to_string(),
                        name: self.names[s].clone(),
                    });
                }
                self.detach(s);
                self.parent[s] = Some(p);
                self.children[p].push(s);
            }
            EditDirective::RemoveSubtree { subject } => {
                let s = self.find(subject)?;
                if self.parent[s].is_none() {
                    return Err(Error::RootEdit(subject.to_string()));
                }
                self.detach(s);
            }
        }
        Ok(())
    }

    /// Tree form plus the draft id of every node in pre-order.
    fn build(&self) -> (Vec<TaxonomyNode>, Vec<usize>) {
        fn rec(d: &Draft, id: usize, order: &mut Vec<usize>) -> TaxonomyNode {
            order.push(id);
            let children = d.children[id].iter().map(|&c| rec(d, c, order)).collect();
            TaxonomyNode { name: d.names[id].clone(), children }
        }
        let mut order = Vec::new();
        let roots = self.roots.iter().map(|&r| rec(self, r, &mut order)).collect();
        (roots, order)
    }
}

/// Structural difference between two taxonomies.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TaxonomyDiff {
    /// Nodes whose name is unique in both taxonomies and whose parent changed.
    pub moved: Vec<(NodePath, NodePath)>,
    pub added: Vec<NodePath>,
    pub removed: Vec<NodePath>,
}

impl TaxonomyDiff {
    pub fn is_empty(&self) -> bool {
        self.moved.is_empty() && self.added.is_empty() && self.removed.is_empty()
    }
}

impl fmt::Display for TaxonomyDiff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (from, to) in &self.moved {
            writeln!(f, "~ {from} -> {to}")?;
        }
        for p in &self.removed {
            writeln!(f, "- {p}")?;
        }
        for p in &self.added {
            writeln!(f, "+ {p}")?;
        }
        Ok(())
    }
}

pub fn diff(a: &Taxonomy, b: &Taxonomy) -> TaxonomyDiff {
    fn unique_names(t: &Taxonomy) -> HashMap<&str, usize> {
        let mut count: HashMap<&str, (usize, usize)> = HashMap::new();
        for i in 0..t.len() {
            count.entry(t.name(i)).or_insert((0, i)).0 += 1;
        }
        count.into_iter().filter(|(_, (n, _))| *n == 1).map(|(k, (_, i))| (k, i)).collect()
    }
    let ua = unique_names(a);
    let ub = unique_names(b);

    let mut moved = Vec::new();
    let mut moved_a = Vec::new();
    let mut moved_b = Vec::new();
    for i in 0..a.len() {
        let name = a.name(i);
        let (Some(_), Some(&j)) = (ua.get(name), ub.get(name)) else { continue };
        let pa = a.parent(i).map(|p| a.path(p));
        let pb = b.parent(j).map(|p| b.path(p));
        let parent_name_a = a.parent(i).map(|p| a.name(p));
        let parent_name_b = b.parent(j).map(|p| b.name(p));
        if parent_name_a != parent_name_b && pa != pb {
            moved.push((a.path(i), b.path(j)));
            moved_a.push(a.path(i));
            moved_b.push(b.path(j));
        }
    }
    let under = |p: &NodePath, roots: &[NodePath]| roots.iter().any(|m| p.starts_with(m));
    let removed = a
        .paths()
        .into_iter()
        .filter(|p| !b.contains(p) && !under(p, &moved_a))
        .collect();
    let added = b
        .paths()
        .into_iter()
        .filter(|p| !a.contains(p) && !under(p, &moved_b))
        .collect();
    TaxonomyDiff { moved, added, removed }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn p(s: &str) -> NodePath {
        s.parse().unwrap()
    }

    #[test]
    fn minimal_roots() {
        let t = Taxonomy::parse("No-hate\nHate\n").unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t.index_of(&p("/No-hate")).unwrap(), 0);
        assert_eq!(t.index_of(&p("/Hate")).unwrap(), 1);
        assert_eq!(t.census(), Census { classes: 0, leaves: 2 });
        assert_eq!(t.serialize(), "No-hate\nHate\n");
    }

    #[test]
    fn indent_jump_is_rejected() {
        let err = Taxonomy::parse("Hate\n    Deep\n").unwrap_err();
        assert!(matches!(err, Error::Indent { line: 2, from: 0, to: 2 }), "{err}");
        assert!(matches!(Taxonomy::parse("  Hate\n"), Err(Error::Indent { line: 1, .. })));
        assert!(matches!(Taxonomy::parse("Hate\n   Odd\n"), Err(Error::OddIndent { line: 2, .. })));
    }

    #[test]
    fn name_rules() {
        assert!(matches!(
            Taxonomy::parse("Hate\n  A\n  A\n"),
            Err(Error::DuplicateSibling { .. })
        ));
        assert!(matches!(Taxonomy::parse("Hate\n  bad name\n"), Err(Error::BadChar { line: 2, .. })));
        assert!(matches!(Taxonomy::parse("Hate\n  a.b\n"), Err(Error::BadChar { .. })));
        // same name under different parents is fine
        let t = Taxonomy::parse("A\n  X\nB\n  X\n  Y\n    X\n").unwrap();
        assert_eq!(t.len(), 6);
        let e = Taxonomy::from_roots(vec![TaxonomyNode::leaf("")]).unwrap_err();
        assert!(matches!(e, Error::EmptyName { .. }));
    }

    #[test]
    fn comments_and_blank_lines_are_skipped() {
        let t = Taxonomy::parse("# header\nHate\n\n  # inner\n  A\n").unwrap();
        assert_eq!(t.serialize(), "Hate\n  A\n");
    }

    #[test]
    fn fixture_census_and_round_trip() {
        let v1a = Taxonomy::parse(fixtures::GENERAL_V1A).unwrap();
        assert_eq!(v1a.census(), Census { classes: 23, leaves: 43 });
        assert_eq!(v1a.serialize(), fixtures::GENERAL_V1A);
        let v1 = Taxonomy::parse(fixtures::GENERAL_V1).unwrap();
        assert_eq!(v1.census(), Census { classes: 22, leaves: 44 });
        assert_eq!(v1.serialize(), fixtures::GENERAL_V1);
        assert_eq!(v1.len(), v1a.len());
    }

    #[test]
    fn ancestors_walk() {
        let t = Taxonomy::parse(fixtures::GENERAL_V1A).unwrap();
        assert!(t.ancestors(&p("/Hate")).unwrap().is_empty());
        assert_eq!(
            t.ancestors(&p("/Hate/Target_of_hate/Religion_or_belief/Jews")).unwrap(),
            vec![p("/Hate"), p("/Hate/Target_of_hate"), p("/Hate/Target_of_hate/Religion_or_belief")]
        );
        let black = p("/Hate/Target_of_hate/Physical_attributes/Skin_color/Non_white/Black");
        let anc = t.ancestors(&black).unwrap();
        assert_eq!(anc.len(), 5);
        assert_eq!(anc.last().unwrap().name(), "Non_white");
        assert!(matches!(t.ancestors(&p("/Hate/Nope")), Err(Error::UnknownPath(_))));
    }

    #[test]
    fn reparent_black_turns_v1_into_v1a() {
        let v1 = Taxonomy::parse(fixtures::GENERAL_V1).unwrap();
        let ds = parse_directives(fixtures::REPARENT_BLACK).unwrap();
        let (v1a, tr) = v1.apply_directives_traced(&ds).unwrap();
        assert_eq!(v1a.serialize(), fixtures::GENERAL_V1A);
        assert_eq!(v1a.len(), v1.len());
        let old = p("/Hate/Target_of_hate/Physical_attributes/Skin_color/Black");
        assert_eq!(
            tr.translate(&old).unwrap(),
            &p("/Hate/Target_of_hate/Physical_attributes/Skin_color/Non_white/Black")
        );
        let jews = p("/Hate/Target_of_hate/Religion_or_belief/Jews");
        assert_eq!(tr.translate(&jews).unwrap(), &jews);
    }

    #[test]
    fn merge_directives_rebuild_general_v1() {
        let base = Taxonomy::parse(fixtures::VIDGEN_BASE).unwrap();
        assert!(!base.contains(&p("/Hate/Target_of_hate/National_origin/Russian")));
        let ds = parse_directives(fixtures::MERGE_V1).unwrap();
        let merged = base.apply_directives(&ds).unwrap();
        assert_eq!(merged.serialize(), fixtures::GENERAL_V1);
    }

    #[test]
    fn add_node_grows_by_one() {
        let base = Taxonomy::parse(fixtures::VIDGEN_BASE).unwrap();
        let d = EditDirective::AddNode {
            parent: p("/Hate/Target_of_hate/National_origin"),
            name: "Russian".into(),
        };
        let t = base.apply_directives(std::slice::from_ref(&d)).unwrap();
        assert_eq!(t.len(), base.len() + 1);
        assert!(matches!(t.apply_directives(&[d]), Err(Error::DuplicateSibling { .. })));
    }

    #[test]
    fn empty_directive_list_is_identity() {
        let t = Taxonomy::parse(fixtures::GENERAL_V1).unwrap();
        assert_eq!(t.apply_directives(&[]).unwrap(), t);
    }

    #[test]
    fn remove_leaf_drops_leaf_count() {
        let t = Taxonomy::parse(fixtures::GENERAL_V1A).unwrap();
        let d = EditDirective::RemoveSubtree { subject: p("/Hate/Types_of_hate/Animosity") };
        let (r, tr) = t.apply_directives_traced(&[d]).unwrap();
        assert_eq!(r.census().leaves, t.census().leaves - 1);
        assert_eq!(r.census().classes, t.census().classes);
        assert!(tr.was_removed(&p("/Hate/Types_of_hate/Animosity")));
    }

    #[test]
    fn directive_errors() {
        let t = Taxonomy::parse(fixtures::GENERAL_V1).unwrap();
        let cyc = EditDirective::Reparent {
            subject: p("/Hate/Target_of_hate"),
            new_parent: p("/Hate/Target_of_hate/Class/Working_class"),
        };
        assert!(matches!(t.apply_directives(&[cyc]), Err(Error::CycleCreated { .. })));
        let own = EditDirective::Reparent {
            subject: p("/Hate/Target_of_hate"),
            new_parent: p("/Hate/Target_of_hate"),
        };
        assert!(matches!(t.apply_directives(&[own]), Err(Error::CycleCreated { .. })));
        let unknown = EditDirective::RemoveSubtree { subject: p("/Hate/Nothing") };
        assert!(matches!(t.apply_directives(&[unknown]), Err(Error::UnknownPath(_))));
        let root = EditDirective::Reparent { subject: p("/Hate"), new_parent: p("/No-hate") };
        assert!(matches!(t.apply_directives(&[root]), Err(Error::RootEdit(_))));
        // two Sexuality-like clashes: moving Sexuality/Sexuality next to its parent
        let clash = EditDirective::Reparent {
            subject: p("/Hate/Target_of_hate/Sexuality/Sexuality"),
            new_parent: p("/Hate/Target_of_hate"),
        };
        assert!(matches!(t.apply_directives(&[clash]), Err(Error::DuplicateSibling { .. })));
    }

    #[test]
    fn directive_parse_errors() {
        assert!(matches!(parse_directives("MOVE /a /b\n"), Err(Error::Directive { line: 1, .. })));
        assert!(matches!(parse_directives("# c\nREPARENT a /b\n"), Err(Error::Directive { line: 2, .. })));
        assert!(matches!(parse_directives("ADD_NODE /a bad.name\n"), Err(Error::BadChar { .. })));
        let ds = parse_directives(fixtures::MERGE_V1).unwrap();
        let text: String = ds.iter().map(|d| format!("{d}\n")).collect();
        assert_eq!(parse_directives(&text).unwrap(), ds);
    }

    #[test]
    fn diff_reports_the_reparent() {
        let v1 = Taxonomy::parse(fixtures::GENERAL_V1).unwrap();
        let v1a = Taxonomy::parse(fixtures::GENERAL_V1A).unwrap();
        let d = diff(&v1, &v1a);
        assert_eq!(d.moved.len(), 1);
        assert_eq!(d.moved[0].0.name(), "Black");
        assert!(d.added.is_empty() && d.removed.is_empty());
        assert!(diff(&v1, &v1).is_empty());
        let base = Taxonomy::parse(fixtures::VIDGEN_BASE).unwrap();
        let d = diff(&base, &v1);
        assert_eq!(d.added.len(), 7);
    }

    #[test]
    fn path_parsing() {
        assert!("Hate".parse::<NodePath>().is_err());
        assert!("/Hate//x".parse::<NodePath>().is_err());
        let q = p("/Hate/Target_of_hate");
        assert_eq!(q.to_string(), "/Hate/Target_of_hate");
        assert_eq!(q.depth(), 1);
        assert_eq!(q.parent().unwrap(), p("/Hate"));
    }
}
