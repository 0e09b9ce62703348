"""Benchmark domains: grids, robots, web graphs, n-queens, knight tours, alignment."""

from .alignment import alignment_space, enumerate_alignments
from .graphfile import ExplicitGraph, load_graph_file, read_graph, save_graph
from .grid import GoalPlacement, GridWorld, generate_grid, place_goals, random_start
from .knight import count_open_tours, knight_problem, knight_tour_space
from .queens import count_solutions, count_tree_nodes, nqueens_problem, nqueens_space
from .robots import multi_robot_problem, run_multi_robot
from .webgraph import SyntheticWebGraph, TopicDistanceScorer, WebGraphParams, synthetic_web_graph
