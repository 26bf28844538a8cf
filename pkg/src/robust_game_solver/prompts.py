"""MCP Prompts for robust game analysis.

This module contains all prompt definitions for the robust games MCP
server, guiding a client through equilibrium analysis with the registered
tools.
"""

from fastmcp import FastMCP


def register_prompts(mcp: FastMCP) -> None:
    """Register all prompts with the MCP server.

    Parameters
    ----------
    mcp : FastMCP
        The FastMCP instance to register prompts with.
    """

    @mcp.prompt(
        name="analyze-robust-game",
        description=(
            "Generates a complete analysis of a robust game: assumption "
            "check, equilibria, opportunity costs and their behavior as the "
            "uncertainty level shrinks"
        )
    )
    def analyze_robust_game_prompt(game: str) -> str:
        """Prompt for complete game analysis.

        Parameters
        ----------
        game : str
            Catalogue name of the game to analyze

        Returns
        -------
        str
            Formatted prompt for game analysis
        """
        return f"""Completely analyze the robust game '{game}' using the \
available robust games MCP server tools.

REQUIRED ANALYSIS:

1. **Assumption Check:**
   - Use `validate_game('{game}')` to check the action intervals, the \
nominal point and concavity in the own action
   - Report every finding and state whether existence is guaranteed

2. **Equilibria:**
   - Use `solve_game('{game}')` to find every robust-optimization \
equilibrium at the file's uncertainty level
   - For each equilibrium report the profile, its residual and whether it \
is an isolated point or an interval
   - Mention any failed starts

3. **Cost of Uncertainty:**
   - For each equilibrium, read the per-player opportunity costs and epsilon
   - Use `opportunity_cost('{game}', player, opponents)` to compare each \
cost with its linear upper bound

4. **Shrinking Uncertainty:**
   - Use `sweep_delta('{game}', start=0.0, stop=1.0, steps=11)` to see how \
the equilibrium set changes with the uncertainty level
   - Use `trace_equilibrium('{game}', profile, start_delta=...)` on each \
equilibrium and report whether it reaches a Nash equilibrium of the \
nominal game or breaks, and where

OUTPUT FORMAT:
- Use markdown to format the response
- Include a table of equilibria with profile, epsilon and path status
- Flag equilibria with no Nash equilibrium counterpart
- Highlight where the number of equilibria changes"""

    @mcp.prompt(
        name="compare-nominal-robust",
        description=(
            "Compares the Nash equilibria of the nominal game with the "
            "robust-optimization equilibria of the uncertain game"
        )
    )
    def compare_nominal_robust_prompt(game: str) -> str:
        """Prompt for comparing nominal and robust play.

        Parameters
        ----------
        game : str
            Catalogue name of the game to compare

        Returns
        -------
        str
            Formatted prompt for the comparison
        """
        return f"""Compare nominal and robust play in the game '{game}'.

REQUIRED ANALYSIS:

1. **Nominal Game:**
   - Use `solve_game('{game}', delta=0.0)` to find the Nash equilibria of \
the nominal game

2. **Robust Game:**
   - Use `solve_game('{game}')` for the equilibria at the file's level
   - Use `solve_game('{game}', delta=1.0)` for full uncertainty

3. **Comparison:**
   - Match each robust equilibrium with the closest nominal one
   - Report the action changes per player and the opportunity costs
   - Use `worst_case_payoff('{game}', player, profile)` to show what each \
player secures at both profiles

4. **Interpretation:**
   - Explain which players act more cautiously under uncertainty
   - Identify robust equilibria that have no nominal counterpart

OUTPUT FORMAT:
- Use markdown with clear sections
- Include a side-by-side table of nominal and robust profiles
- Quantify every difference"""

    @mcp.prompt(
        name="cournot-briefing",
        description=(
            "Explains the robust Cournot duopoly for a parameter set: "
            "reaction thresholds, equilibrium case and cost of uncertainty"
        )
    )
    def cournot_briefing_prompt(params: str) -> str:
        """Prompt for a Cournot duopoly briefing.

        Parameters
        ----------
        params : str
            Demand parameters as ``a, b_hat, gamma_hat, b_lo, b_hi,
            gamma_lo, gamma_hi, delta``

        Returns
        -------
        str
            Formatted prompt for the briefing
        """
        return f"""Brief the robust Cournot duopoly with parameters \
"{params}" (a, b_hat, gamma_hat, b_lo, b_hi, gamma_lo, gamma_hi, delta).

REQUIRED ANALYSIS:

1. **Closed Form:**
   - Use `cournot_analysis(...)` with the parameters "{params}"
   - Report the scaled slopes and the reaction thresholds

2. **Equilibrium Case:**
   - Name the equilibrium case and list the equilibria
   - For a continuum, give both endpoints
   - When reported, explain the critical uncertainty level and whether it \
lies inside (0, 1)

3. **Profits:**
   - Compare nominal and worst-case profits at every equilibrium
   - Report each firm's opportunity cost of uncertainty

4. **Sensitivity:**
   - Re-run `cournot_analysis` at a few lower uncertainty levels
   - Describe how the case changes as delta goes to 0

OUTPUT FORMAT:
- Use markdown with clear sections
- Include the thresholds and equilibria as numbers
- End with a short summary for a non-specialist"""
