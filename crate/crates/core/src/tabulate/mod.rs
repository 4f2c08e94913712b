//! Case tables: trace flattening, list splitting and train/test splitting.

mod flatten;
mod lists;
mod split;
mod table;

pub use flatten::{flatten, FlattenOptions};
pub use lists::{render_list, render_pairs, split_lists};
pub use split::{train_test_split, SplitTables};
pub use table::{
    CaseTable, Column, ColumnKind, RowLookup, RowView, TextColumn, CASE_ID_HEADER, LABEL_HEADER,
};
