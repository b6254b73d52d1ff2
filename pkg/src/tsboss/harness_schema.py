"""Fixed column orders for the experiment CSV outputs."""

ROW_COLUMNS = (
    "sweep_param",
    "sweep_value",
    "replicate",
    "method",
    "mode",
    "adj_precision",
    "adj_recall",
    "ori_precision",
    "ori_recall",
    "runtime_seconds",
    "adj_tp",
    "adj_fp",
    "adj_fn",
    "adj_tn",
    "ori_tp",
    "ori_fp",
    "ori_fn",
    "ori_tn",
    "n_rows",
    "search_seed",
    "run_bes",
    "penalty_discount",
    "num_restarts",
    # generator configuration snapshot
    "N",
    "T",
    "K",
    "density",
    "frac_contemporaneous",
    "autocorr",
    "tau_max",
    "burn_in_factor",
    "rng_seed",
    "noise_std",
    "autocorr_lower",
)

SUMMARY_COLUMNS = (
    "method",
    "mode",
    "sweep_param",
    "sweep_value",
    "n_replicates",
    "adj_precision_mean",
    "adj_precision_stderr",
    "adj_precision_n_valid",
    "adj_precision_all_nan",
    "adj_recall_mean",
    "adj_recall_stderr",
    "adj_recall_n_valid",
    "adj_recall_all_nan",
    "ori_precision_mean",
    "ori_precision_stderr",
    "ori_precision_n_valid",
    "ori_precision_all_nan",
    "ori_recall_mean",
    "ori_recall_stderr",
    "ori_recall_n_valid",
    "ori_recall_all_nan",
    "runtime_mean",
)
