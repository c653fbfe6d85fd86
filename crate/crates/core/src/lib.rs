pub mod backend;
pub mod il;
pub mod render;
pub mod rewrite;
pub mod sample;
pub mod signature;
pub mod term;
pub mod tiling;
