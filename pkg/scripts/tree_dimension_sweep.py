"""Box slope, cover verdict and MDP outcome for several trees and visual parameters."""
import math

from hypb.dimension import box_dimension_fit, hausdorff_upper_bound, mdp_lower_bound, tree_ball_measure, tree_balls, tree_cover_family
from hypb.tree_boundary import RootedTree, cover_table

TREES = [(2, 2), (4, 3), (3, 3), (5, 4)]
PARAMS = [2.0, math.e, 3.0]

print(f"{'tree':>8} {'a':>6} {'slope':>10} {'log(b)/log(a)':>14} {'upper@+.05':>10} {'mdp@s':>6} {'mdp@s+.1':>8}")
for root, b in TREES:
    t = RootedTree(root, b, 10)
    for a in PARAMS:
        s = math.log(b) / math.log(a)
        fit = box_dimension_fit(cover_table(t, a, range(1, 11)), use_all=True)
        fam = tree_cover_family(t, a, range(1, 11))
        balls, mu = tree_balls(t, a, 6), tree_ball_measure(t, a)
        # a depth-k cylinder has mass 1 / (root * b**(k-1)) and r**s = b**-k
        C = b / root
        at = mdp_lower_bound(mu, balls, s, C).all_pass
        above = mdp_lower_bound(mu, balls, s + 0.1, C).all_pass
        print(f"{root}-{b:<6} {a:6.3f} {fit.slope:10.6f} {s:14.6f} {str(hausdorff_upper_bound(fam, s + 0.05).supports):>10} {str(at):>6} {str(above):>8}")
