"""
Paired t-test on per-fold F1
============================

Ten folds of baseline and SVM F1 for end-of-day labels, compared with a
two-sided paired Student t-test whose p-value comes from the regularized
incomplete beta function.
"""

from scipy import stats

from lonelytext.evaluation import paired_t_test
from lonelytext.special import t_two_sided_pvalue

baseline = [0.769, 0.769, 0.769, 0.769, 0.757, 0.757, 0.757, 0.757, 0.757, 0.827]
svm = [0.743, 0.769, 0.769, 0.769, 0.757, 0.757, 0.757, 0.757, 0.729, 0.827]

result = paired_t_test(baseline, svm)
print(result.as_dict())
print("scipy ttest_rel p:", stats.ttest_rel(svm, baseline).pvalue)

# the familiar 5% critical value for 9 degrees of freedom
print("p(|t| >= 2.262, df=9) =", t_two_sided_pvalue(2.262, 9))
