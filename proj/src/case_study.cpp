#include "assistrag/case_study.hpp"

namespace assistrag {

namespace {

const char* kDannyGreenBasketball =
    "Danny Green (born June 22, 1987) is an American professional basketball player who last "
    "played for the Philadelphia 76ers of the National Basketball Association (NBA). In his NBA "
    "career, Green has played for six teams. As of 2020, Green is one of just four players in "
    "history to have won NBA championships with three different teams.";

const char* kJamesWorthy =
    "James Worthy James Ager Worthy (born February 27, 1961) is an American former professional "
    "basketball player who is currently a commentator, television host, and analyst. A standout "
    "at the University of North Carolina, the 6 ft 9 in (2.06 m) small forward shared College "
    "Player of the Year honors en route to leading the Tar Heels to the 1982 NCAA Championship.";

const char* kDannyGreenBoxer =
    "Danny Green (born 15 March 1973) is an Australian former professional boxer who competed "
    "between 2001 and 2017. He held multiple world championships in two weight classes, "
    "including the WBA interim light heavyweight title and the WBC cruiserweight title.";

const char* kEarlWeaver =
    "Earl Sidney Weaver (August 14, 1930 - January 19, 2013) was an American professional "
    "baseball manager, author, and television broadcaster. After playing in minor league "
    "baseball, he retired without playing in Major League Baseball and became a manager, "
    "spending 17 seasons with the Baltimore Orioles.";

const char* kExtractionResponse =
    "- Danny Green (born June 22, 1987) is an American professional basketball player who last "
    "played for the Philadelphia 76ers of the National Basketball Association (NBA). In his NBA "
    "career, Green has played for six teams. As of 2020, Green is one of just four players in "
    "history to have won NBA championships with three different teams.\n"
    "- James Worthy James Ager Worthy (born February 27, 1961) is an American former "
    "professional basketball player who is currently a commentator, television host, and "
    "analyst. A standout at the University of North Carolina, the 6 ft 9 in (2.06 m) small "
    "forward shared College Player of the Year honors en route to leading the Tar Heels to the "
    "1982 NCAA Championship.";

const char* kFinalAnswer =
    "James Worthy was born on February 27, 1961, while Danny Green was born on June 22, 1987. "
    "Since James Worthy was born earlier, he is older. So the answer is James Worthy.";

const char* kNoteResponse =
    "James Worthy was born on February 27, 1961, and Danny Green was born on June 22, 1987. "
    "Since James Worthy was born earlier, he is older than Danny Green. Therefore, the answer "
    "is James Worthy.";

} // namespace

CaseStudy builtin_case_study() {
    CaseStudy cs;

    cs.documents = {
        {"james_worthy", "James Worthy", kJamesWorthy},
        {"danny_green_basketball", "Danny Green (basketball)", kDannyGreenBasketball},
        {"danny_green_boxer", "Danny Green (boxer)", kDannyGreenBoxer},
        {"earl_weaver", "Earl Weaver", kEarlWeaver},
    };

    cs.memory_notes = {
        {"Who is older, Danny Jones or David Coverdale?",
         "David Coverdale was born on 22 September 1951, while Danny Jones was born on 12 March "
         "1986. Since David Coverdale was born earlier, he is older than Danny Jones. So the "
         "answer is David Coverdale."},
        {"Who is older, Danny Shirley or Kevin Parker?",
         "Danny Shirley was born on August 12, 1956, while Kevin Parker was born on January 20, "
         "1986. Since Danny Shirley was born earlier than Kevin Parker, he is older. So the "
         "answer is Danny Shirley."},
        {"Who is older, Keith Richards or Mick Jagger?",
         "Keith Richards was born on 18 December 1943, while Mick Jagger was born on 26 July "
         "1943. Since Mick Jagger was born earlier, he is older. So the answer is Mick Jagger."},
    };

    cs.assistant_script.entries = {
        {"Please generate a series of search queries",
         "When was Danny Green born?\nWhen was James Worthy born?"},
        {"Please extract relevant snippets", kExtractionResponse},
        {"Are the memory notes helpful?",
         "Yes, the retrieved notes solve the same kind of age-comparison question and show the "
         "reasoning pattern to follow."},
        {"Is the extracted knowledge relevant?",
         "Yes, the extracted knowledge gives the birth dates of both Danny Green and James "
         "Worthy, which is exactly what the question needs."},
        {"figure out the reasoning process", kNoteResponse},
    };

    cs.main_script.entries = {
        {"Answer the question concisely", kFinalAnswer},
    };

    cs.question.question_id = "case-study-1";
    cs.question.text = "Who is older, Danny Green or James Worthy?";
    cs.question.gold_answers = {"James Worthy"};
    return cs;
}

} // namespace assistrag
