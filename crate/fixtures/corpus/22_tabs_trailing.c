int	g_tabbed	=	3;   

int	tabbed(void)	
{
	return	g_tabbed;	
}   


