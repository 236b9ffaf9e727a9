pub mod crawl;
pub mod evaluate;
pub mod normalize;
pub mod predict;
pub mod train;
