#pragma once

// Verbatim prompt templates used by the feasibility annotator and the
// contradiction judge. Substitution slots: {statement} (single-quoted in the
// feasibility template), {search_sentence}, <statement>, <article>,
// <prediction>.

#include <string_view>

namespace dqa::prompts {

inline constexpr std::string_view kFeasibilityTemplate = R"__dqa(The following statement is going to be given to an AI system to determine if it's true or false and write an explanation why.
Statement: '{statement}'

The only thing the AI will be given is the statement itself, as written above - no context, visuals, or any other information. Your task is to assess if the AI could possibly give a valid answer. Note that this is not about assessing how likely the AI is to give the right answer, but whether it's even possible to evaluate the veracity of the statement based on the information given.{search_sentence}

For example, here is a non-exhaustive list of information that might make it hard to evaluate the veracity of a statement if missing:
1. Identity of a key person, such as the speaker or someone else referenced ambiguously in the statement.
2: Location, if veracity depends on it but it isn't provided. 
3. Textual information or evidence that's mentioned in the statement but not supplied.
4. Visual or audio evidence mentioned in the statement (note that the AI will only be given the statement text). 
5. Temporal information. Note that the date the statement was made is unknown. This might not be relevant, though, if the statement could be evaluated as true or false regardless of when it was made.
6. There's no claim for which evaluating the veracity even makes sense.

Rate on the following scale how possible it seems to evaluate the veracity of the statement:

1: Feasible, assuming that the retrieval of external knowledge is possible- There is some clear ambiguity, missing context, or multiple potential interpretations. But there seems to be around one-half chance of evaluating the meaning as intended or figuring out the context from a strong knowledge base or web search.
0: Impossible to evaluate, even with access to external knowledge retrieval systems. There are clearly multiple valid ways the statement could be interpreted that would strongly influence the veracity, mandatory and irrecoverable information is missing, or the statement contains no claim or is downright nonsensical.

Give a brief explanation, then write a vertical bar "|", followed by your rating as a number alone.)__dqa";

inline constexpr std::string_view kSearchSentence = R"__dqa( The AI will have access to a web search system to look for both primary and secondary sources, but the evaluation might still be impossible if there is too much ambiguity or missing context.)__dqa";

inline constexpr std::string_view kContradictionBase = R"__dqa(In the following, you will be provided a statement and two assessments of its veracity. Your task is to evaluate if the assessments contradict each other. Note that not having all of the same evidence or content, or even reaching a different conclusion, does not alone constitute a contradiction, especially though not exclusively if they are interpreting the statement differently, or considering different time periods or other contexts. There's only a contradiction if they actually say opposing things that are not up to reasonable interpretation or context differences. 

Statement: <statement>

Assessment 1: <article>

Assessment 2: <prediction>

)__dqa";

inline constexpr std::string_view kContradictionScoreTail = R"__dqa(Now that you've ready the statement and assessments, rate how much the assessments contradict or not on a scale from 0 (no contradiction) to 10 (complete contradiction). However, you must not state your score until you've presented a concise analysis. Do not begin your response with a number. First write your analysis, then write a vertical bar "|", then finally state your contradiction score.)__dqa";

inline constexpr std::string_view kContradictionBinaryTail = R"__dqa(Now that you've ready the statement and assessments, answer if the assessments contradict or not. However, you must not state your decision until you've presented a concise analysis. Do not begin your response with a label. First write your analysis, then write a vertical bar "|", then finally "1: contradiction" or "0: no contradiction".)__dqa";

inline constexpr std::string_view kContradictionTrinaryTail = R"__dqa(Now that you've ready the statement and assessments, answer if the assessments contradict or not. However, you must not state your decision until you've presented a concise analysis. Do not begin your response with a label. First write your analysis, then write a vertical bar "|", then finally "1: contradiction" or "0: no contradiction", or if you are not sure write "-1: unsure".)__dqa";

inline constexpr std::string_view kFactualityPrompt = R"__dqa(Your task is to analyze the factuality of the given statement.

You may invoke the "search" tool as many times as needed to retrieve up-to-date information. However, before invoking the tool, you must explain your rationale for doing so.

After providing all your analysis steps, summarize your analysis and state "True statement; Factuality: 1" if you think the statement is factual, or "False statement; Factuality: 0" otherwise.)__dqa";

}  // namespace dqa::prompts
