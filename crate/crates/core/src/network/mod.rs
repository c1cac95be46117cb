//! Cascaded networks of nodes coupled through a unidirectional channel.

pub mod cascade;
pub mod master;
pub mod protocols;
pub mod source;
pub mod trajectories;
