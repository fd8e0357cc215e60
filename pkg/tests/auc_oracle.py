"""Exhaustive pairwise AUC in exact rational arithmetic."""

from fractions import Fraction


def brute_force_auc(scores, labels):
    pos = [s for s, y in zip(scores, labels) if y == 1]
    neg = [s for s, y in zip(scores, labels) if y == 0]
    credit = Fraction(0)
    for a in pos:
        for b in neg:
            if a > b:
                credit += 1
            elif a == b:
                credit += Fraction(1, 2)
    return credit / (len(pos) * len(neg))
