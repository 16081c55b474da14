//! Howard canonical form: chance descendants of decisions become deterministic.

use num_traits::Zero;

use super::{one_point, InfluenceDiagram, Node, NodeId, NodeSpec};
use crate::rational::Rational;
use crate::scm::for_each_tuple;

/// Gives every stochastic chance node with a decision ancestor a fresh
/// parentless noise node `u_<name>` whose values are response functions (one
/// value per parent row), weighted by the product of the original row
/// probabilities. Only response functions of positive probability are kept,
/// in lexicographic order. New nodes are appended, so existing ids are stable.
pub fn to_howard_canonical_form(id: &InfluenceDiagram) -> InfluenceDiagram {
    let mut nodes: Vec<Node> = id.nodes().to_vec();
    for y in id.ids() {
        let node = id.node(y);
        if !node.is_chance() || node.is_deterministic() || !id.has_decision_ancestor(y) {
            continue;
        }
        let NodeSpec::Chance { domain, rows } = &node.spec else {
            continue;
        };
        let size = domain.len();
        let mut responses: Vec<Vec<usize>> = Vec::new();
        let mut weights: Vec<Rational> = Vec::new();
        for_each_tuple(&vec![size; rows.len()], |response| {
            let w: Rational = response
                .iter()
                .enumerate()
                .map(|(row, &v)| rows[row][v].clone())
                .product();
            if !w.is_zero() {
                responses.push(response.to_vec());
                weights.push(w);
            }
        });

        let noise = NodeId(nodes.len());
        let noise_name = fresh_name(&nodes, &format!("u_{}", node.name));
        let noise_labels: Vec<String> = responses
            .iter()
            .map(|r| {
                let parts: Vec<&str> = r.iter().map(|&v| domain[v].as_str()).collect();
                format!("({})", parts.join(","))
            })
            .collect();
        let noise_label_refs: Vec<&str> = noise_labels.iter().map(String::as_str).collect();
        nodes.push(Node::chance(
            &noise_name,
            vec![],
            &noise_label_refs,
            vec![weights],
        ));

        // New parent order: original parents then the noise node, which is
        // therefore the least significant position of the row index.
        let mut table = Vec::with_capacity(rows.len() * responses.len());
        for row in 0..rows.len() {
            for response in &responses {
                table.push(one_point(size, response[row]));
            }
        }
        let target = &mut nodes[y.0];
        target.parents.push(noise);
        target.spec = NodeSpec::Chance {
            domain: domain.clone(),
            rows: table,
        };
    }
    InfluenceDiagram::new(nodes).expect("canonical form of a valid diagram is valid")
}

fn fresh_name(nodes: &[Node], base: &str) -> String {
    let mut name = base.to_string();
    while nodes.iter().any(|n| n.name == name) {
        name.push('\'');
    }
    name
}
