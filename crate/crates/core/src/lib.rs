//! Mixed-autonomy Stackelberg routing on directed networks with affine
//! two-class latencies.
//!
//! The crate covers four layers:
//!
//! * [`model`]: validated game instances, flows, latencies and social cost.
//! * [`equilibria`]: the human Wardrop equilibrium induced by a fixed leader
//!   flow, and the two-class system optimum.
//! * [`game`]: the mixed-autonomy SCALE leader strategy and the leader and
//!   follower play built on it.
//! * [`bounds`]: closed-form price-of-anarchy bounds as functions of the
//!   network autonomy fraction and the minimum degree of asymmetry.
//!
//! [`harness`] adds brute-force oracles, random instances, batch bound
//! verification and figure data; [`cli`] is the command-line front end.

pub mod bounds;
pub mod cli;
pub mod equilibria;
pub mod game;
pub mod harness;
pub mod model;
