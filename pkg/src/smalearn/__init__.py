"""Grammatical inference with simple multi-head automata.

Modules:

* :mod:`smalearn.automaton`: SMA definition and deterministic simulator
* :mod:`smalearn.languages`: the six benchmark languages
* :mod:`smalearn.env`: episodic recognition environment
* :mod:`smalearn.genetic`: chromosome encoding and the genetic algorithm
* :mod:`smalearn.qlearn`: recurrent deep Q-learning agent
* :mod:`smalearn.evaluation`: metric tables and head statistics
* :mod:`smalearn.cli`: command line entry point
"""

__version__ = "0.1.0"
