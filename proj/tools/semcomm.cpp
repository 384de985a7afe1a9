#include "semcomm/cli/commands.h"

int main(int argc, char** argv)
{
    return semcomm::cli::run_cli(argc, argv);
}
