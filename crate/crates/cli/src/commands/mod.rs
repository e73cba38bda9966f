pub mod common;
pub mod eval_attn;
pub mod gen_data;
pub mod report;
pub mod run_exp;
pub mod run_matrix;
pub mod train_embed;
