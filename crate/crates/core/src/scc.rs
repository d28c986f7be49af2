//! Strongly connected components of the policy-induced transition graph,
//! used to find the recurrent class(es) of a Markov chain: a component with
//! no edges leaving it is a recurrent (terminal) class, everything else is
//! transient.

use alloc::vec;
use alloc::vec::Vec;

const UNVISITED: u32 = u32::MAX;

/// A partition of graph nodes into strongly connected components.
///
/// Components are numbered in reverse topological order: every edge points
/// from a component id to an equal or smaller one.
#[derive(Clone, Debug)]
pub struct Components {
    /// Component id of every node.
    pub comp_of: Vec<u32>,
    /// Number of components.
    pub count: usize,
}

/// Tarjan's algorithm, iterative to stay stack-safe on graphs with long
/// paths. The graph is given in compressed sparse row form.
pub fn strongly_connected_components(
    n: usize,
    row_offsets: &[u32],
    cols: &[u32],
) -> Components {
    assert_eq!(row_offsets.len(), n + 1);
    let mut index = vec![UNVISITED; n];
    let mut lowlink = vec![0u32; n];
    let mut on_stack = vec![false; n];
    let mut comp_of = vec![UNVISITED; n];
    let mut stack: Vec<u32> = Vec::new();
    let mut work: Vec<(u32, u32)> = Vec::new();
    let mut next_index = 0u32;
    let mut comp_count = 0u32;

    for root in 0..n as u32 {
        if index[root as usize] != UNVISITED {
            continue;
        }
        index[root as usize] = next_index;
        lowlink[root as usize] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root as usize] = true;
        work.push((root, 0));

        while let Some(&mut (v, ref mut cursor)) = work.last_mut() {
            let vi = v as usize;
            let edges = &cols[row_offsets[vi] as usize..row_offsets[vi + 1] as usize];
            if (*cursor as usize) < edges.len() {
                let w = edges[*cursor as usize];
                *cursor += 1;
                let wi = w as usize;
                if index[wi] == UNVISITED {
                    index[wi] = next_index;
                    lowlink[wi] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[wi] = true;
                    work.push((w, 0));
                } else if on_stack[wi] {
                    lowlink[vi] = lowlink[vi].min(index[wi]);
                }
            } else {
                work.pop();
                if lowlink[vi] == index[vi] {
                    loop {
                        let w = stack.pop().expect("component member on stack");
                        on_stack[w as usize] = false;
                        comp_of[w as usize] = comp_count;
                        if w == v {
                            break;
                        }
                    }
                    comp_count += 1;
                }
                if let Some(&mut (parent, _)) = work.last_mut() {
                    let pi = parent as usize;
                    lowlink[pi] = lowlink[pi].min(lowlink[vi]);
                }
            }
        }
    }

    Components {
        comp_of,
        count: comp_count as usize,
    }
}

/// Component ids with no edge into a different component, in ascending
/// order. For a stochastic transition graph these are exactly the recurrent
/// classes.
pub fn terminal_components(
    components: &Components,
    row_offsets: &[u32],
    cols: &[u32],
) -> Vec<u32> {
    let n = components.comp_of.len();
    let mut escapes = vec![false; components.count];
    for v in 0..n {
        let cv = components.comp_of[v];
        for &w in &cols[row_offsets[v] as usize..row_offsets[v + 1] as usize] {
            if components.comp_of[w as usize] != cv {
                escapes[cv as usize] = true;
            }
        }
    }
    (0..components.count as u32)
        .filter(|&c| !escapes[c as usize])
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn csr(n: usize, edges: &[(u32, u32)]) -> (Vec<u32>, Vec<u32>) {
        let mut sorted = edges.to_vec();
        sorted.sort_unstable();
        let mut row_offsets = vec![0u32; n + 1];
        let mut cols = Vec::with_capacity(edges.len());
        let mut at = 0usize;
        for v in 0..n as u32 {
            while at < sorted.len() && sorted[at].0 == v {
                cols.push(sorted[at].1);
                at += 1;
            }
            row_offsets[v as usize + 1] = cols.len() as u32;
        }
        (row_offsets, cols)
    }

    #[test]
    fn a_directed_chain_has_singleton_components() {
        let (offsets, cols) = csr(3, &[(0, 1), (1, 2), (2, 2)]);
        let c = strongly_connected_components(3, &offsets, &cols);
        assert_eq!(c.count, 3);
        assert_ne!(c.comp_of[0], c.comp_of[1]);
        assert_ne!(c.comp_of[1], c.comp_of[2]);
        // Only the self-looping sink is terminal.
        let terminal = terminal_components(&c, &offsets, &cols);
        assert_eq!(terminal, [c.comp_of[2]]);
    }

    #[test]
    fn a_cycle_is_one_component() {
        let (offsets, cols) = csr(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]);
        let c = strongly_connected_components(4, &offsets, &cols);
        assert_eq!(c.count, 1);
        assert!(c.comp_of.iter().all(|&x| x == c.comp_of[0]));
        assert_eq!(
            terminal_components(&c, &offsets, &cols),
            [c.comp_of[0]]
        );
    }

    #[test]
    fn transient_states_feed_two_recurrent_classes() {
        // 0 -> {1, 3}; {1, 2} is one cycle, {3, 4} another.
        let (offsets, cols) = csr(
            5,
            &[(0, 1), (0, 3), (1, 2), (2, 1), (3, 4), (4, 3)],
        );
        let c = strongly_connected_components(5, &offsets, &cols);
        assert_eq!(c.count, 3);
        let terminal = terminal_components(&c, &offsets, &cols);
        assert_eq!(terminal.len(), 2);
        assert!(terminal.contains(&c.comp_of[1]));
        assert!(terminal.contains(&c.comp_of[3]));
        assert!(!terminal.contains(&c.comp_of[0]));
    }

    #[test]
    fn edges_point_to_equal_or_smaller_component_ids() {
        // Reverse topological numbering is what terminal detection and the
        // evaluation code rely on.
        let edges = [
            (0u32, 1u32),
            (1, 2),
            (2, 0),
            (2, 3),
            (3, 4),
            (4, 5),
            (5, 3),
            (1, 6),
            (6, 6),
        ];
        let (offsets, cols) = csr(7, &edges);
        let c = strongly_connected_components(7, &offsets, &cols);
        for &(u, v) in &edges {
            assert!(c.comp_of[u as usize] >= c.comp_of[v as usize]);
        }
    }

    #[test]
    fn an_edgeless_graph_is_all_terminal_singletons() {
        let (offsets, cols) = csr(3, &[]);
        let c = strongly_connected_components(3, &offsets, &cols);
        assert_eq!(c.count, 3);
        assert_eq!(terminal_components(&c, &offsets, &cols).len(), 3);
    }
}
