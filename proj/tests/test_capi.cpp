#include <anchorloc/anchorloc.h>
int main() { return 1; }
