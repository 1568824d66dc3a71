pub mod oracle;
pub mod randomized;
