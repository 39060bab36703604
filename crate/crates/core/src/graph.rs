//! Application-graph validation: the simulator and the sandboxer both
//! require a DAG with exactly one entry function.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;

use crate::types::ApplicationGraph;

/// One problem found in an application graph. Diagnostics name the node or
/// edge involved so callers can report them verbatim.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GraphDiagnostic {
    EmptyGraph,
    DuplicateFunction { name: String },
    UnknownCaller { caller: String, callee: String },
    UnknownCallee { caller: String, callee: String },
    DuplicatePosition { caller: String, position: u32 },
    Cycle { members: Vec<String> },
    NoEntry,
    MultipleEntries { names: Vec<String> },
}

impl fmt::Display for GraphDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphDiagnostic::EmptyGraph => write!(f, "graph declares no functions"),
            GraphDiagnostic::DuplicateFunction { name } => {
                write!(f, "function {name:?} is declared more than once")
            }
            GraphDiagnostic::UnknownCaller { caller, callee } => {
                write!(f, "edge {caller:?} -> {callee:?} names undeclared caller {caller:?}")
            }
            GraphDiagnostic::UnknownCallee { caller, callee } => {
                write!(f, "edge {caller:?} -> {callee:?} names undeclared callee {callee:?}")
            }
            GraphDiagnostic::DuplicatePosition { caller, position } => {
                write!(f, "caller {caller:?} has two edges at position {position}")
            }
            GraphDiagnostic::Cycle { members } => {
                write!(f, "call graph contains a cycle through [{}]", members.join(", "))
            }
            GraphDiagnostic::NoEntry => {
                write!(f, "no entry function: every function has an incoming edge")
            }
            GraphDiagnostic::MultipleEntries { names } => {
                write!(f, "multiple entry functions: [{}]", names.join(", "))
            }
        }
    }
}

/// Checks every [`ApplicationGraph`] invariant and returns the violations.
/// An empty list means the graph is a single-entry DAG with consistent
/// edges.
pub fn validate_graph(graph: &ApplicationGraph) -> Vec<GraphDiagnostic> {
    let mut diags = Vec::new();

    if graph.functions.is_empty() {
        diags.push(GraphDiagnostic::EmptyGraph);
        return diags;
    }

    let mut declared: HashSet<&str> = HashSet::new();
    for function in &graph.functions {
        if !declared.insert(&function.name) {
            diags.push(GraphDiagnostic::DuplicateFunction { name: function.name.clone() });
        }
    }

    let mut positions: HashSet<(&str, u32)> = HashSet::new();
    let mut well_formed_edges = Vec::new();
    for edge in &graph.edges {
        let mut ok = true;
        if !declared.contains(edge.caller.as_str()) {
            diags.push(GraphDiagnostic::UnknownCaller {
                caller: edge.caller.clone(),
                callee: edge.callee.clone(),
            });
            ok = false;
        }
        if !declared.contains(edge.callee.as_str()) {
            diags.push(GraphDiagnostic::UnknownCallee {
                caller: edge.caller.clone(),
                callee: edge.callee.clone(),
            });
            ok = false;
        }
        if ok && !positions.insert((edge.caller.as_str(), edge.position)) {
            diags.push(GraphDiagnostic::DuplicatePosition {
                caller: edge.caller.clone(),
                position: edge.position,
            });
        }
        if ok {
            well_formed_edges.push(edge);
        }
    }

    // Kahn's algorithm over the well-formed edges; whatever cannot be
    // topologically ordered is part of a cycle.
    let mut indegree: HashMap<&str, usize> =
        graph.functions.iter().map(|f| (f.name.as_str(), 0)).collect();
    for edge in &well_formed_edges {
        *indegree.get_mut(edge.callee.as_str()).unwrap() += 1;
    }

    let entries: Vec<&str> = graph
        .functions
        .iter()
        .map(|f| f.name.as_str())
        .filter(|name| indegree[name] == 0)
        .collect();
    match entries.len() {
        0 => diags.push(GraphDiagnostic::NoEntry),
        1 => {}
        _ => diags.push(GraphDiagnostic::MultipleEntries {
            names: entries.iter().map(|s| s.to_string()).collect(),
        }),
    }

    let mut queue: VecDeque<&str> = entries.into();
    let mut ordered = 0usize;
    let mut remaining = indegree.clone();
    while let Some(name) = queue.pop_front() {
        ordered += 1;
        for edge in &well_formed_edges {
            if edge.caller == name {
                let d = remaining.get_mut(edge.callee.as_str()).unwrap();
                *d -= 1;
                if *d == 0 {
                    queue.push_back(edge.callee.as_str());
                }
            }
        }
    }
    let distinct: HashSet<&str> = graph.functions.iter().map(|f| f.name.as_str()).collect();
    if ordered < distinct.len() {
        let mut members: Vec<String> = remaining
            .iter()
            .filter(|(_, &d)| d > 0)
            .map(|(name, _)| name.to_string())
            .collect();
        members.sort();
        diags.push(GraphDiagnostic::Cycle { members });
    }

    diags
}
