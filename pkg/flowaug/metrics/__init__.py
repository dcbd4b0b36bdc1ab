""".. include:: README.md"""

from .discrepancy import WorstSubgroup
from .discrepancy import macro_std
from .discrepancy import overall_weighted_std
from .discrepancy import per_class_weighted_std
from .discrepancy import table_macro_std
from .discrepancy import weighted_std
from .discrepancy import worst_subgroup
from .report import DiscrepancyReport
from .report import RunSummary
from .report import build_report
from .report import method_means
from .report import read_report_json
from .report import read_summary
from .report import summarize_runs
from .report import write_report_csv
from .report import write_report_json
from .report import write_summary
from .subgroups import SubgroupAccuracyTable
from .subgroups import load_grouping
from .subgroups import load_predictions
from .subgroups import regroup
from .subgroups import subgroup_accuracies
