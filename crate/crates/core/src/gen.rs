//! Worklist construction of machines whose states are structured keys.
//!
//! A generator describes each state by a key and a function returning that
//! state's transitions. Only states reachable from the initial key are
//! emitted.

use std::collections::{HashMap, VecDeque};
use std::hash::Hash;

use crate::tm::{MachineSpec, Move, Rule};

/// One transition of a keyed state.
pub(crate) struct Edge<K> {
    pub read: Vec<char>,
    pub to: K,
    pub write: Vec<char>,
    pub moves: Vec<Move>,
}

impl<K> Edge<K> {
    /// Single-tape shorthand.
    pub fn one(read: char, to: K, write: char, mv: Move) -> Edge<K> {
        Edge { read: vec![read], to, write: vec![write], moves: vec![mv] }
    }
}

/// What a keyed state does.
pub(crate) struct Node<K> {
    pub accept: bool,
    pub edges: Vec<Edge<K>>,
}

impl<K> Node<K> {
    pub fn accept() -> Node<K> {
        Node { accept: true, edges: Vec::new() }
    }
    pub fn edges(edges: Vec<Edge<K>>) -> Node<K> {
        Node { accept: false, edges }
    }
}

/// Explores from `initial`, filling in `spec.states`, `spec.initial`,
/// `spec.accept` and `spec.delta`. `label` gives a readable prefix for a key.
pub(crate) fn explore<K, F, L>(spec: &mut MachineSpec, initial: K, mut expand: F, label: L)
where
    K: Clone + Eq + Hash,
    F: FnMut(&K) -> Node<K>,
    L: Fn(&K) -> String,
{
    let mut names: HashMap<K, String> = HashMap::new();
    let mut counts: HashMap<String, usize> = HashMap::new();
    let mut queue = VecDeque::new();
    let mut intern = |k: &K, names: &mut HashMap<K, String>, queue: &mut VecDeque<K>| -> String {
        if let Some(n) = names.get(k) {
            return n.clone();
        }
        let base = label(k);
        let c = counts.entry(base.clone()).or_insert(0);
        let name = if *c == 0 { base.clone() } else { format!("{base}.{c}") };
        *c += 1;
        names.insert(k.clone(), name.clone());
        queue.push_back(k.clone());
        name
    };
    spec.states.clear();
    spec.delta.clear();
    spec.accept.clear();
    spec.initial = intern(&initial, &mut names, &mut queue);
    while let Some(k) = queue.pop_front() {
        let from = names[&k].clone();
        spec.states.push(from.clone());
        let node = expand(&k);
        if node.accept {
            spec.accept.push(from.clone());
        }
        for e in node.edges {
            let to = intern(&e.to, &mut names, &mut queue);
            spec.delta.push(Rule { from: from.clone(), read: e.read, to, write: e.write, moves: e.moves });
        }
    }
}
