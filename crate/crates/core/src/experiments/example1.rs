use crate::env::{AgentDistribution, Environment, ValueSet};
use crate::mechanism::{CoalitionRule, OrderedTable};
use crate::rational::{rat, Rational};

/// A two-agent anonymous BIC rule whose ordinal projection is not anonymous.
#[derive(Debug, Clone)]
pub struct Example1 {
    pub env: Environment,
    pub f: OrderedTable,
    /// Expected projection, indexed by coalition mask (bit `i` set when agent
    /// `i` reports a positive value).
    pub hat_f: CoalitionRule,
}

pub fn example1_fixture() -> Example1 {
    let values = ValueSet::new([-2, -1, 1, 2].map(|v| rat(v, 1)).to_vec()).expect("valid values");
    let agent1 = AgentDistribution::new(vec![rat(1, 2), rat(1, 6), rat(1, 6), rat(1, 6)]);
    let agent2 = AgentDistribution::new(vec![rat(1, 2), rat(1, 4), rat(1, 8), rat(1, 8)]);
    let env = Environment::new(values, vec![agent1, agent2]).expect("valid environment");

    // Rows are agent 1's report, columns agent 2's, both ascending.
    let rows: [[i64; 4]; 4] = [[1, 0, 0, 0], [0, 1, 1, 1], [0, 1, 1, 1], [0, 1, 1, 1]];
    let table: Vec<Rational> = rows.iter().flatten().map(|&a| rat(a, 1)).collect();
    let f = OrderedTable::new(2, 4, table).expect("4x4 table");

    let hat_f = CoalitionRule::new(2, vec![rat(7, 12), rat(1, 3), rat(1, 4), rat(1, 1)]).expect("4 coalitions");
    Example1 { env, f, hat_f }
}
