//! Exact welfare analysis of binary voting rules with private values.
//!
//! A group chooses between the status quo and a Reform. Each agent's value
//! for the Reform is drawn independently from a finite support shared by all
//! agents. This crate evaluates social choice functions under those
//! environments in exact rational arithmetic: interim allocations, Bayesian
//! incentive compatibility, expected welfare, and the ordinal projection of
//! a cardinal rule. It also solves for the welfare-maximizing anonymous BIC
//! rule as a linear program.
//!
//! ```
//! use binvote::experiments::make_theorem2_env;
//! use binvote::mechanism::qmr_best;
//! use binvote::opt::solve_opt;
//! use binvote::rational::{rat, Rational};
//! use num_traits::Zero;
//!
//! let env = make_theorem2_env(3, rat(10, 1), Rational::zero()).unwrap();
//! assert_eq!(qmr_best(&env).best_welfare(), &rat(21, 8));
//! assert_eq!(solve_opt(&env).unwrap().welfare, rat(5, 1));
//! ```

pub mod env;
pub mod experiments;
pub mod io;
pub mod mechanism;
pub mod opt;
pub mod rational;

pub use env::{AgentDistribution, Environment, ValueSet};
pub use mechanism::{AnonymousScf, AnyMechanism, Mechanism};
pub use rational::{rat, Rational};
