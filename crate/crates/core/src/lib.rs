pub mod poset;
pub mod subdivision;
pub mod concretecats;
pub mod laxdiagram;
pub mod rlaxsections;
pub mod strattopos;
pub mod extendable;
pub mod cli;
